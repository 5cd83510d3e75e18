#include "gfield/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gfield {

FieldSample draw_sample(const Decomposition& d, std::uint64_t seed, std::uint64_t stream_index) {
  FieldSample s;
  s.seed = seed;
  s.stream_index = stream_index;
  s.meta = d.meta;
  s.coeffs.resize(d.terms());
  const NormalStream rng(seed, stream_index);
  for (std::size_t i = 0; i < d.terms(); ++i) {
    if (!(d.lambdas[i] >= 0.0)) throw std::invalid_argument("decomposition has a negative lambda");
    s.coeffs[i] = std::sqrt(d.lambdas[i]) * rng.at(i);
  }
  return s;
}

std::vector<double> field_coefficients(const FieldSample& s, const Decomposition& d) {
  if (s.coeffs.size() != d.terms()) throw std::invalid_argument("sample does not match the decomposition");
  const long m = static_cast<long>(d.basis_size());
  std::vector<double> c(static_cast<std::size_t>(m), 0.0);
  for (std::size_t i = 0; i < d.terms(); ++i) {
    const double a = s.coeffs[i];
    if (a == 0.0) continue;
    const double* row = d.phis.row(static_cast<long>(i)).data();
    for (long p = 0; p < m; ++p) c[static_cast<std::size_t>(p)] += a * row[p];
  }
  return c;
}

SampledField::SampledField(const FieldSample& s, const Decomposition& d)
    : basis_(basis_of(d)), coeffs_(field_coefficients(s, d)) {}

double SampledField::operator()(std::span<const double> x) const { return basis_.synthesize(coeffs_, x); }

double SampledField::pair(const CoefficientFunctional& eta) const {
  return apply_functional(eta, [&](std::span<const double> x) { return (*this)(x); });
}

GridValues SampledField::on_grid(int resolution, std::size_t cap) const {
  if (resolution < 0) throw std::invalid_argument("grid resolution must be >= 0");
  GridValues g;
  g.dim = basis_.dim();
  g.resolution = resolution;
  const std::size_t n = grid_size(g.dim, resolution, cap);
  g.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.values[i] = (*this)(g.node(i));
  return g;
}

double eval_field(const FieldSample& s, const Decomposition& d, std::span<const double> x) {
  return SampledField(s, d)(x);
}

GridValues field_on_grid(const FieldSample& s, const Decomposition& d, int resolution, std::size_t cap) {
  return SampledField(s, d).on_grid(resolution, cap);
}

double pair_field(const FieldSample& s, const Decomposition& d, const CoefficientFunctional& eta) {
  return SampledField(s, d).pair(eta);
}

RowMatrix sample_pairings(std::span<const double> lambdas, const Eigen::MatrixXd& table, std::uint64_t seed,
                          std::size_t n_samples, Execution exec, std::uint64_t first_stream) {
  const long r = static_cast<long>(lambdas.size());
  if (table.rows() != r) throw std::invalid_argument("pairing table rows must match the number of terms");
  std::vector<double> sq(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0)) throw std::invalid_argument("decomposition has a negative lambda");
    sq[i] = std::sqrt(lambdas[i]);
  }
  const long f = table.cols();
  RowMatrix out = RowMatrix::Zero(static_cast<long>(n_samples), f);
  const long n = static_cast<long>(n_samples);
  auto row = [&](long s) {
    const NormalStream rng(seed, first_stream + static_cast<std::uint64_t>(s));
    double* o = out.row(s).data();
    for (long i = 0; i < r; ++i) {
      const double a = sq[i] * rng.at(static_cast<std::uint64_t>(i));
      for (long k = 0; k < f; ++k) o[k] += a * table(i, k);
    }
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (long s = 0; s < n; ++s) row(s);
  } else {
    for (long s = 0; s < n; ++s) row(s);
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_grid_csv(std::ostream& out, const std::vector<GridValues>& grids) {
  if (grids.empty()) throw std::invalid_argument("no grids to write");
  const int dim = grids.front().dim;
  for (int i = 0; i < dim; ++i) out << 'x' << (i + 1) << ',';
  out << "value\n";
  for (const auto& g : grids) {
    if (g.dim != dim) throw std::invalid_argument("grids of different dimension");
    for (std::size_t k = 0; k < g.values.size(); ++k) {
      for (double c : g.node(k)) out << format_double(c) << ',';
      out << format_double(g.values[k]) << '\n';
    }
  }
}

}  // namespace gfield
