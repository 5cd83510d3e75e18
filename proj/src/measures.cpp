#include "gfield/measures.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gfield {

namespace {

// Composite rule on [0,1]^dim: `cells` cells per axis, `rule` in each cell.
template <class F>
double tensor_quadrature(int dim, int cells, const GaussRule& rule, F&& f) {
  const std::size_t q = rule.nodes.size();
  std::vector<double> nodes, weights;
  const double h = 1.0 / cells;
  for (int c = 0; c < cells; ++c)
    for (std::size_t i = 0; i < q; ++i) {
      nodes.push_back((c + rule.nodes[i]) * h);
      weights.push_back(rule.weights[i] * h);
    }
  const std::size_t per_axis = nodes.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> x(static_cast<std::size_t>(dim));
  double acc = 0.0;
  while (true) {
    double w = 1.0;
    for (int a = 0; a < dim; ++a) {
      x[a] = nodes[idx[a]];
      w *= weights[idx[a]];
    }
    acc += w * f(std::span<const double>(x));
    int a = dim - 1;
    while (a >= 0 && ++idx[a] == per_axis) idx[a--] = 0;
    if (a < 0) break;
  }
  return acc;
}

constexpr int kRepresentingCells = 16;
constexpr int kRepresentingOrder = 10;

}  // namespace

double DensityOnGrid::density(std::span<const double> x) const {
  return DyadicBasis(meta.dim, meta.k_max, 0.0).synthesize(coeffs, x);
}

Decomposition whitenoise_decomposition(const BaseMeasure& base, int dim, int k_max, TensorOptions opts) {
  if (!(total_mass(base, dim) > 0.0)) throw std::invalid_argument("base measure has zero mass");
  KernelSpec spec{WhiteNoise{base}, dim};
  const TensorCoefficients tc = tensor_coefficients(spec, dim, k_max, 0.0, opts);
  return biorthogonalize(tc, 0.0, NormMode::total_variation);
}

MeasureSample sample_measure_field(const Decomposition& d, const BaseMeasure& base, std::uint64_t seed,
                                   std::uint64_t stream_index) {
  if (d.space != Space::measure) throw std::invalid_argument("decomposition is not measure-valued");
  const FieldSample s = draw_sample(d, seed, stream_index);
  MeasureSample m;
  m.base = base;
  m.seed = seed;
  m.stream_index = stream_index;
  m.rng = s.rng;
  DensityOnGrid dens{d.meta, field_coefficients(s, d)};
  if (const auto* c = std::get_if<Counting>(&base.kind)) {
    AtomList atoms;
    for (const auto& pt : c->points) {
      atoms.points.push_back(pt);
      atoms.weights.push_back(dens.density(pt));
    }
    m.representation = std::move(atoms);
  } else {
    m.representation = std::move(dens);
  }
  return m;
}

QuadratureOptions measure_quadrature(const BaseMeasure& base, int k_max) {
  if (std::holds_alternative<Density>(base.kind)) return {1 << (k_max + 4)};
  return {std::max(64, 1 << k_max)};
}

double pair_measure(const MeasureSample& m, const PointFunction& test) {
  if (const auto* a = std::get_if<AtomList>(&m.representation)) {
    double s = 0.0;
    for (std::size_t i = 0; i < a->points.size(); ++i) s += a->weights[i] * test(a->points[i]);
    return s;
  }
  const auto& dens = std::get<DensityOnGrid>(m.representation);
  const DyadicBasis basis(dens.meta.dim, dens.meta.k_max, 0.0);
  const PointFunction f = [&](std::span<const double> x) { return basis.synthesize(dens.coeffs, x); };
  return l2_pairing(m.base, dens.meta.dim, f, test, measure_quadrature(m.base, dens.meta.k_max));
}

Eigen::MatrixXd measure_pairing_table(const Decomposition& d, const BaseMeasure& base,
                                      const std::vector<PointFunction>& tests) {
  if (d.space != Space::measure) throw std::invalid_argument("decomposition is not measure-valued");
  const DyadicBasis basis = basis_of(d);
  const QuadratureOptions q = measure_quadrature(base, d.meta.k_max);
  const long r = static_cast<long>(d.terms());
  Eigen::MatrixXd p(r, static_cast<long>(tests.size()));
  for (long i = 0; i < r; ++i) {
    const auto row = d.phis.row(i);
    const std::span<const double> c(row.data(), static_cast<std::size_t>(row.size()));
    const PointFunction f = [&](std::span<const double> x) { return basis.synthesize(c, x); };
    for (std::size_t t = 0; t < tests.size(); ++t) p(i, static_cast<long>(t)) = l2_pairing(base, d.meta.dim, f, tests[t], q);
  }
  return p;
}

void write_measure_csv(std::ostream& out, const std::vector<MeasureSample>& samples, int resolution) {
  if (samples.empty()) throw std::invalid_argument("no samples to write");
  const MeasureSample& first = samples.front();
  const bool atoms = std::holds_alternative<AtomList>(first.representation);
  out << "# base = " << first.base.name() << '\n';
  out << "# seed = " << first.seed << '\n';
  out << "# streams = " << first.stream_index << ".." << samples.back().stream_index << '\n';
  out << "# rng = " << first.rng << '\n';
  out << "# samples = " << samples.size() << '\n';
  int dim = 1;
  if (atoms) {
    const auto& a = std::get<AtomList>(first.representation);
    if (!a.points.empty()) dim = static_cast<int>(a.points.front().size());
  } else {
    dim = std::get<DensityOnGrid>(first.representation).meta.dim;
  }
  for (int i = 0; i < dim; ++i) out << 'x' << (i + 1) << ',';
  out << (atoms ? "weight\n" : "density\n");
  for (const auto& m : samples) {
    if (const auto* a = std::get_if<AtomList>(&m.representation)) {
      for (std::size_t k = 0; k < a->points.size(); ++k) {
        for (double c : a->points[k]) out << format_double(c) << ',';
        out << format_double(a->weights[k]) << '\n';
      }
      continue;
    }
    const auto& dens = std::get<DensityOnGrid>(m.representation);
    const DyadicBasis basis(dens.meta.dim, dens.meta.k_max, 0.0);
    GridValues g;
    g.dim = dens.meta.dim;
    g.resolution = resolution;
    g.values.resize(grid_size(g.dim, resolution, std::size_t{1} << 24));
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = basis.synthesize(dens.coeffs, g.node(i));
    for (std::size_t k = 0; k < g.values.size(); ++k) {
      for (double c : g.node(k)) out << format_double(c) << ',';
      out << format_double(g.values[k]) << '\n';
    }
  }
}

GaussRule gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  // Golub-Welsch on the Legendre Jacobi matrix.
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    j(i, i - 1) = j(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussRule r;
  for (int i = 0; i < order; ++i) {
    r.nodes.push_back(0.5 * (es.eigenvalues()[i] + 1.0));
    const double v = es.eigenvectors()(0, i);
    r.weights.push_back(v * v);  // 2 v^2 on [-1,1], halved for [0,1]
  }
  return r;
}

double GaussianRepresentingMeasure::mass(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim) throw std::invalid_argument("point has the wrong dimension");
  double m = k;
  for (double zi : z) m *= 0.5 * (std::erf((1.0 - zi) / std::numbers::sqrt2) - std::erf(-zi / std::numbers::sqrt2));
  return m;
}

double GaussianRepresentingMeasure::pair(std::span<const double> z, const PointFunction& test) const {
  if (static_cast<int>(z.size()) != dim) throw std::invalid_argument("point has the wrong dimension");
  const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * dim);
  static const GaussRule rule = gauss_legendre(kRepresentingOrder);
  return k * tensor_quadrature(dim, kRepresentingCells, rule, [&](std::span<const double> x) {
           double r2 = 0.0;
           for (int i = 0; i < dim; ++i) r2 += (x[i] - z[i]) * (x[i] - z[i]);
           return test(x) * norm * std::exp(-0.5 * r2);
         });
}

double representing_measure_pairing(const GaussianRepresentingMeasure& g, const PointFunction& eta1,
                                    const PointFunction& eta2) {
  static const GaussRule rule = gauss_legendre(kRepresentingOrder);
  return tensor_quadrature(g.dim, kRepresentingCells, rule,
                           [&](std::span<const double> z) { return eta1(z) * g.pair(z, eta2); });
}

double kernel_integral_pairing(const KernelSpec& spec, const PointFunction& f, const PointFunction& g,
                               QuadratureOptions opts) {
  if (!spec.pointwise()) throw std::invalid_argument("kernel is measure-valued; use pairing operations");
  const BaseMeasure leb{Lebesgue{}};
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  const PointFunction outer = [&](std::span<const double> x) {
    const PointFunction inner = [&](std::span<const double> y) { return g(y) * eval_kernel(spec, x, y); };
    return f(x) * l2_pairing(leb, spec.dim, inner, one, opts);
  };
  return l2_pairing(leb, spec.dim, outer, one, opts);
}

}  // namespace gfield
