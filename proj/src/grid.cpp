#include "gfield/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace gfield {

namespace {

constexpr int kStencilRadius = 4;

// Max quotient over all pairs of one axis-aligned line (stride, count),
// visiting every pair.
double line_all_pairs(const double* v, std::size_t stride, std::size_t count, double h,
                      double gamma) {
  double best = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j) {
      const double q = std::abs(v[j * stride] - v[i * stride]) /
                       std::pow(static_cast<double>(j - i) * h, gamma);
      best = std::max(best, q);
    }
  return best;
}

// Same maximum, scanning lags upward and stopping once range / lag^gamma
// cannot exceed the best quotient found so far.
double line_pruned(const double* v, std::size_t stride, std::size_t count, double h, double gamma) {
  if (count < 2) return 0.0;
  double lo = v[0], hi = v[0];
  for (std::size_t i = 1; i < count; ++i) {
    lo = std::min(lo, v[i * stride]);
    hi = std::max(hi, v[i * stride]);
  }
  const double range = hi - lo;
  double best = 0.0;
  for (std::size_t lag = 1; lag < count; ++lag) {
    const double denom = std::pow(static_cast<double>(lag) * h, gamma);
    if (range / denom <= best) break;
    double m = 0.0;
    for (std::size_t i = 0; i + lag < count; ++i)
      m = std::max(m, std::abs(v[(i + lag) * stride] - v[i * stride]));
    best = std::max(best, m / denom);
  }
  return best;
}

std::vector<std::size_t> strides_of(int dim, std::size_t g) {
  std::vector<std::size_t> s(dim, 1);
  for (int i = dim - 2; i >= 0; --i) s[i] = s[i + 1] * g;
  return s;
}

// Pairs within Chebyshev radius kStencilRadius that are not axis-aligned,
// for a single base node. Offsets are taken in the half space "first nonzero
// component positive" so each unordered pair is seen once.
double stencil_at(const GridValues& grid, std::size_t base, const std::vector<std::size_t>& strides,
                  const std::vector<std::vector<int>>& offsets, double h, double gamma) {
  const std::size_t g = grid.points_per_axis();
  const int dim = grid.dim;
  std::vector<long> c(dim);
  std::size_t r = base;
  for (int i = 0; i < dim; ++i) {
    c[i] = static_cast<long>(r / strides[i]);
    r %= strides[i];
  }
  double best = 0.0;
  for (const auto& off : offsets) {
    std::size_t other = 0;
    double d2 = 0.0;
    bool inside = true;
    for (int i = 0; i < dim; ++i) {
      const long t = c[i] + off[i];
      if (t < 0 || t >= static_cast<long>(g)) {
        inside = false;
        break;
      }
      other += static_cast<std::size_t>(t) * strides[i];
      d2 += static_cast<double>(off[i]) * off[i];
    }
    if (!inside) continue;
    const double q = std::abs(grid.values[other] - grid.values[base]) / std::pow(std::sqrt(d2) * h, gamma);
    best = std::max(best, q);
  }
  return best;
}

std::vector<std::vector<int>> diagonal_offsets(int dim) {
  std::vector<std::vector<int>> out;
  const int w = 2 * kStencilRadius + 1;
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= w;
  std::vector<int> off(dim);
  for (long lin = 0; lin < total; ++lin) {
    long r = lin;
    int nonzero = 0;
    for (int i = dim - 1; i >= 0; --i) {
      off[i] = static_cast<int>(r % w) - kStencilRadius;
      r /= w;
      nonzero += off[i] != 0;
    }
    if (nonzero < 2) continue;
    const auto first = std::find_if(off.begin(), off.end(), [](int v) { return v != 0; });
    if (*first < 0) continue;
    out.push_back(off);
  }
  return out;
}

}  // namespace

std::size_t GridValues::size() const {
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= points_per_axis();
  return n;
}

std::vector<double> GridValues::node(std::size_t linear) const {
  const std::size_t g = points_per_axis();
  std::vector<double> x(dim);
  for (int i = dim - 1; i >= 0; --i) {
    x[i] = std::ldexp(static_cast<double>(linear % g), -resolution);
    linear /= g;
  }
  return x;
}

std::size_t grid_size(int dim, int resolution, std::size_t cap) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (resolution < 0 || resolution > 30) throw std::invalid_argument("resolution out of range");
  const double total = std::pow(std::ldexp(1.0, resolution) + 1.0, dim);
  if (total > static_cast<double>(cap)) throw std::length_error("grid exceeds the configured point cap");
  return static_cast<std::size_t>(total);
}

double sup_norm(const GridValues& grid) {
  double m = 0.0;
  for (double v : grid.values) m = std::max(m, std::abs(v));
  return m;
}

double holder_seminorm(const GridValues& grid, double gamma, Execution exec) {
  if (grid.values.empty()) throw std::invalid_argument("empty grid");
  if (grid.values.size() != grid.size()) throw std::invalid_argument("grid size does not match resolution");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
  const std::size_t g = grid.points_per_axis();
  const double h = std::ldexp(1.0, -grid.resolution);
  const auto strides = strides_of(grid.dim, g);
  const std::size_t lines_per_axis = grid.size() / g;

  // Axis-aligned lines: line l of axis a starts at the node obtained by
  // inserting a zero coordinate at position a.
  auto line_start = [&](int axis, std::size_t l) {
    std::size_t start = 0, r = l;
    for (int i = grid.dim - 1; i >= 0; --i) {
      if (i == axis) continue;
      start += (r % g) * strides[i];
      r /= g;
    }
    return start;
  };

  const auto offsets = grid.dim >= 2 ? diagonal_offsets(grid.dim) : std::vector<std::vector<int>>{};
  double best = 0.0;
  if (exec == Execution::serial) {
    for (int axis = 0; axis < grid.dim; ++axis)
      for (std::size_t l = 0; l < lines_per_axis; ++l)
        best = std::max(best, line_all_pairs(grid.values.data() + line_start(axis, l), strides[axis], g, h, gamma));
    if (!offsets.empty())
      for (std::size_t b = 0; b < grid.size(); ++b)
        best = std::max(best, stencil_at(grid, b, strides, offsets, h, gamma));
    return best;
  }

  const long n_lines = static_cast<long>(lines_per_axis);
  for (int axis = 0; axis < grid.dim; ++axis) {
    if (n_lines == 1) {
      // A single line: parallelise inside the lag scan instead.
      const double* v = grid.values.data();
      const std::size_t stride = strides[axis];
      double lo = v[0], hi = v[0];
      for (std::size_t i = 1; i < g; ++i) {
        lo = std::min(lo, v[i * stride]);
        hi = std::max(hi, v[i * stride]);
      }
      const double range = hi - lo;
      for (std::size_t lag = 1; lag < g; ++lag) {
        const double denom = std::pow(static_cast<double>(lag) * h, gamma);
        if (range / denom <= best) break;
        double m = 0.0;
        const long count = static_cast<long>(g - lag);
#pragma omp parallel for reduction(max : m) schedule(static)
        for (long i = 0; i < count; ++i)
          m = std::max(m, std::abs(v[(i + lag) * stride] - v[i * stride]));
        best = std::max(best, m / denom);
      }
      continue;
    }
    double axis_best = 0.0;
#pragma omp parallel for reduction(max : axis_best) schedule(dynamic, 4)
    for (long l = 0; l < n_lines; ++l)
      axis_best = std::max(axis_best, line_pruned(grid.values.data() + line_start(axis, static_cast<std::size_t>(l)),
                                                  strides[axis], g, h, gamma));
    best = std::max(best, axis_best);
  }
  if (!offsets.empty()) {
    double diag_best = 0.0;
    const long n = static_cast<long>(grid.size());
#pragma omp parallel for reduction(max : diag_best) schedule(static)
    for (long b = 0; b < n; ++b)
      diag_best = std::max(diag_best, stencil_at(grid, static_cast<std::size_t>(b), strides, offsets, h, gamma));
    best = std::max(best, diag_best);
  }
  return best;
}

}  // namespace gfield
