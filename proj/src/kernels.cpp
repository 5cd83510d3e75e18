#include "gfield/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gfield {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    r2 += d * d;
  }
  return r2;
}

// Cell index and upper weight of x on a uniform grid of `g` nodes.
std::pair<int, double> grid_cell(double x, int g) {
  const double t = x * (g - 1);
  int j = std::min(static_cast<int>(std::floor(t)), g - 2);
  j = std::max(j, 0);
  return {j, t - j};
}

double eval_grid_kernel(const GridKernel& k, std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(x.size());
  const int g = k.points_per_axis;
  std::size_t nodes = 1;
  for (int i = 0; i < n; ++i) nodes *= static_cast<std::size_t>(g);
  std::vector<std::pair<int, double>> cx(n), cy(n);
  for (int i = 0; i < n; ++i) {
    cx[i] = grid_cell(x[i], g);
    cy[i] = grid_cell(y[i], g);
  }
  const std::size_t corners = std::size_t{1} << n;
  double acc = 0.0;
  for (std::size_t mx = 0; mx < corners; ++mx) {
    std::size_t ix = 0;
    double wx = 1.0;
    for (int i = 0; i < n; ++i) {
      const bool up = (mx >> i) & 1u;
      ix = ix * g + static_cast<std::size_t>(cx[i].first + up);
      wx *= up ? cx[i].second : 1.0 - cx[i].second;
    }
    if (wx == 0.0) continue;
    for (std::size_t my = 0; my < corners; ++my) {
      std::size_t iy = 0;
      double wy = 1.0;
      for (int i = 0; i < n; ++i) {
        const bool up = (my >> i) & 1u;
        iy = iy * g + static_cast<std::size_t>(cy[i].first + up);
        wy *= up ? cy[i].second : 1.0 - cy[i].second;
      }
      if (wy == 0.0) continue;
      acc += wx * wy * k.values[ix * nodes + iy];
    }
  }
  return acc;
}

GridKernel read_grid_kernel(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read grid kernel file '" + path + "'");
  std::vector<double> values;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (auto& cell : split(line, ',')) values.push_back(parse_double(cell));
    ++rows;
  }
  if (rows == 0 || values.size() != rows * rows)
    throw std::invalid_argument("grid kernel table must be square");
  const int g = static_cast<int>(std::lround(std::pow(static_cast<double>(rows), 1.0 / dim)));
  GridKernel k{g, std::move(values)};
  std::size_t expect = 1;
  for (int i = 0; i < dim; ++i) expect *= static_cast<std::size_t>(g);
  if (expect != rows) throw std::invalid_argument("grid kernel rows are not a full grid");
  return k;
}

// Gauss-Legendre 3-point rule on [-1,1].
constexpr double kGaussNode = 0.7745966692414833770;  // sqrt(3/5)
constexpr double kGaussNodes[3] = {-kGaussNode, 0.0, kGaussNode};
constexpr double kGaussWeights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

template <class Visit>
void for_each_gauss_node(int dim, int cells, Visit&& visit) {
  const double h = 1.0 / cells;
  const long per_axis = static_cast<long>(cells) * 3;
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= per_axis;
  std::vector<double> x(dim);
  for (long lin = 0; lin < total; ++lin) {
    long r = lin;
    double w = 1.0;
    for (int i = dim - 1; i >= 0; --i) {
      const long a = r % per_axis;
      r /= per_axis;
      const long cell = a / 3;
      const int q = static_cast<int>(a % 3);
      x[i] = (static_cast<double>(cell) + 0.5 * (1.0 + kGaussNodes[q])) * h;
      w *= 0.5 * h * kGaussWeights[q];
    }
    visit(std::span<const double>(x), w);
  }
}

template <class Visit>
void for_each_midpoint(int dim, int cells, Visit&& visit) {
  const double h = 1.0 / cells;
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= cells;
  double w = 1.0;
  for (int i = 0; i < dim; ++i) w *= h;
  std::vector<double> x(dim);
  for (long lin = 0; lin < total; ++lin) {
    long r = lin;
    for (int i = dim - 1; i >= 0; --i) {
      x[i] = (static_cast<double>(r % cells) + 0.5) * h;
      r /= cells;
    }
    visit(std::span<const double>(x), w);
  }
}

// Integral over [0,1] of psi(2^ka (t - ta)) * psi(2^kb (t - tb)).
double hat_product_1d(const Dyadic& a, const Dyadic& b, int ka, int kb) {
  const double ta = a.value(), tb = b.value();
  const double ha = std::ldexp(1.0, -ka), hb = std::ldexp(1.0, -kb);
  auto fa = [&](double t) { return eval_mother((t - ta) / ha); };
  auto fb = [&](double t) { return eval_mother((t - tb) / hb); };
  const double lo = std::max({0.0, ta - ha, tb - hb});
  const double hi = std::min({1.0, ta + ha, tb + hb});
  if (!(hi > lo)) return 0.0;
  std::vector<double> br = {lo, hi, ta, tb, ta - ha, ta + ha, tb - hb, tb + hb};
  std::erase_if(br, [&](double t) { return t < lo || t > hi; });
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double l = br[i], r = br[i + 1], m = 0.5 * (l + r);
    acc += (r - l) / 6.0 * (fa(l) * fb(l) + 4.0 * fa(m) * fb(m) + fa(r) * fb(r));
  }
  return acc;
}

}  // namespace

std::string BaseMeasure::name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Lebesgue>) return "lebesgue";
        else if constexpr (std::is_same_v<T, Density>) return k.name;
        else {
          std::string s = "counting:";
          for (std::size_t i = 0; i < k.points.size(); ++i) {
            if (i) s += ';';
            for (std::size_t j = 0; j < k.points[i].size(); ++j) {
              if (j) s += ',';
              s += fmt_double(k.points[i][j]);
            }
          }
          return s;
        }
      },
      kind);
}

std::string KernelSpec::to_string() const {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExpAlpha>) return "exp-alpha:" + fmt_double(f.alpha);
        else if constexpr (std::is_same_v<T, GaussianSE>) return "gaussian-se:" + fmt_double(f.scale);
        else if constexpr (std::is_same_v<T, WhiteNoise>) return "white-noise:" + f.base.name();
        else return "grid-kernel:" + std::to_string(f.points_per_axis);
      },
      family);
}

KernelSpec parse_kernel(const std::string& text, int dim) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  const auto colon = text.find(':');
  const std::string family = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  KernelSpec spec;
  spec.dim = dim;
  if (family == "exp-alpha") {
    spec.family = ExpAlpha{rest.empty() ? 0.5 : parse_double(rest)};
  } else if (family == "gaussian-se") {
    spec.family = GaussianSE{rest.empty() ? 1.0 : parse_double(rest)};
  } else if (family == "white-noise") {
    const auto c2 = rest.find(':');
    const std::string kind = rest.substr(0, c2);
    const std::string args = c2 == std::string::npos ? "" : rest.substr(c2 + 1);
    if (kind == "lebesgue" || kind.empty()) {
      spec.family = WhiteNoise{BaseMeasure{Lebesgue{}}};
    } else if (kind == "counting") {
      Counting c;
      for (const auto& pt : split(args, ';')) {
        std::vector<double> p;
        for (const auto& v : split(pt, ',')) p.push_back(parse_double(v));
        if (static_cast<int>(p.size()) != dim)
          throw std::invalid_argument("counting point has wrong dimension");
        c.points.push_back(std::move(p));
      }
      spec.family = WhiteNoise{BaseMeasure{std::move(c)}};
    } else if (kind == "density") {
      const std::string prefix = "affine:";
      if (args.rfind(prefix, 0) != 0)
        throw std::invalid_argument("density bases support 'affine:c0,c1,...'");
      std::vector<double> c;
      for (const auto& v : split(args.substr(prefix.size()), ',')) c.push_back(parse_double(v));
      if (static_cast<int>(c.size()) != dim + 1)
        throw std::invalid_argument("affine density needs dim + 1 coefficients");
      double corner_min = c[0];
      for (int i = 1; i <= dim; ++i) corner_min += std::min(0.0, c[i]);
      if (corner_min < 0.0) throw std::invalid_argument("affine density is negative on the cube");
      Density d{[c](std::span<const double> x) {
                  double v = c[0];
                  for (std::size_t i = 0; i < x.size(); ++i) v += c[i + 1] * x[i];
                  return v;
                },
                "density:" + args};
      spec.family = WhiteNoise{BaseMeasure{std::move(d)}};
    } else {
      throw std::invalid_argument("unknown white-noise base '" + kind + "'");
    }
  } else if (family == "grid-kernel") {
    spec.family = read_grid_kernel(rest, dim);
  } else {
    throw std::invalid_argument("unknown kernel family '" + family + "'");
  }
  validate(spec);
  return spec;
}

void validate(const KernelSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("dim must be >= 1");
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExpAlpha>) {
          if (!(f.alpha > 0.0 && f.alpha < 1.0))
            throw std::invalid_argument("exp-alpha parameter must lie in (0,1)");
        } else if constexpr (std::is_same_v<T, GaussianSE>) {
          if (!(f.scale > 0.0)) throw std::invalid_argument("gaussian-se scale must be > 0");
        } else if constexpr (std::is_same_v<T, WhiteNoise>) {
          (void)total_mass(f.base, spec.dim);
        } else {
          if (f.points_per_axis < 2) throw std::invalid_argument("grid kernel needs >= 2 nodes per axis");
          std::size_t nodes = 1;
          for (int i = 0; i < spec.dim; ++i) nodes *= static_cast<std::size_t>(f.points_per_axis);
          if (f.values.size() != nodes * nodes)
            throw std::invalid_argument("grid kernel table has wrong size");
          for (std::size_t i = 0; i < nodes; ++i)
            for (std::size_t j = 0; j < i; ++j)
              if (f.values[i * nodes + j] != f.values[j * nodes + i])
                throw std::invalid_argument("grid kernel table is not symmetric");
        }
      },
      spec.family);
}

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExpAlpha>) {
          return std::exp(-0.5 * std::pow(squared_distance(x, y), f.alpha));
        } else if constexpr (std::is_same_v<T, GaussianSE>) {
          return std::exp(-squared_distance(x, y) / (2.0 * f.scale * f.scale));
        } else if constexpr (std::is_same_v<T, WhiteNoise>) {
          throw std::invalid_argument("kernel is measure-valued; use pairing operations");
        } else {
          return eval_grid_kernel(f, x, y);
        }
      },
      spec.family);
}

double kernel_pairing(const KernelSpec& spec, const CoefficientFunctional& a,
                      const CoefficientFunctional& b) {
  if (!spec.pointwise()) throw std::invalid_argument("kernel is measure-valued; use pairing operations");
  double acc = 0.0;
  for (const auto& p : a.atoms()) {
    double row = 0.0;
    for (const auto& q : b.atoms()) row += q.weight * eval_kernel(spec, p.point, q.point);
    acc += p.weight * row;
  }
  return acc;
}

double l2_pairing(const BaseMeasure& base, int dim, const PointFunction& f, const PointFunction& g,
                  QuadratureOptions opts) {
  if (opts.cells_per_axis < 1) throw std::invalid_argument("cells_per_axis must be >= 1");
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        double acc = 0.0;
        if constexpr (std::is_same_v<T, Lebesgue>) {
          for_each_gauss_node(dim, opts.cells_per_axis,
                              [&](std::span<const double> x, double w) { acc += w * f(x) * g(x); });
        } else if constexpr (std::is_same_v<T, Density>) {
          for_each_midpoint(dim, opts.cells_per_axis, [&](std::span<const double> x, double w) {
            const double d = k.density(x);
            if (d < 0.0) throw std::invalid_argument("negative density in base measure");
            acc += w * d * f(x) * g(x);
          });
        } else {
          for (const auto& p : k.points) acc += f(p) * g(p);
        }
        return acc;
      },
      base.kind);
}

double total_mass(const BaseMeasure& base, int dim, QuadratureOptions opts) {
  if (const auto* c = std::get_if<Counting>(&base.kind)) {
    for (const auto& p : c->points) {
      if (static_cast<int>(p.size()) != dim) throw std::invalid_argument("counting point has wrong dimension");
      for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("counting point outside [0,1]^n");
    }
  }
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  const double m = l2_pairing(base, dim, one, one, opts);
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("base measure has no positive finite mass");
  return m;
}

double hat_product_integral(const DyadicIndex& a, const DyadicIndex& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < a.dim() && v != 0.0; ++i)
    v *= hat_product_1d(a.coords()[i], b.coords()[i], a.level(), b.level());
  return v;
}

}  // namespace gfield
