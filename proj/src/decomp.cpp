#include "gfield/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <omp.h>

namespace gfield {

std::string to_string(Space s) { return s == Space::hoelder ? "hoelder" : "measure"; }

std::string to_string(NormMode m) {
  switch (m) {
    case NormMode::grid_hoelder: return "grid-hoelder";
    case NormMode::coefficient_euclidean: return "coefficient-euclidean";
    case NormMode::total_variation: return "total-variation";
  }
  return "?";
}

Space parse_space(const std::string& s) {
  if (s == "hoelder") return Space::hoelder;
  if (s == "measure") return Space::measure;
  throw std::invalid_argument("unknown space '" + s + "'");
}

NormMode parse_norm_mode(const std::string& s) {
  if (s == "grid-hoelder") return NormMode::grid_hoelder;
  if (s == "coefficient-euclidean") return NormMode::coefficient_euclidean;
  if (s == "total-variation") return NormMode::total_variation;
  throw std::invalid_argument("unknown norm mode '" + s + "'");
}

double Decomposition::lambda_sum() const { return std::accumulate(lambdas.begin(), lambdas.end(), 0.0); }

double Decomposition::sqrt_lambda_sum() const {
  double s = 0.0;
  for (double l : lambdas) s += std::sqrt(l);
  return s;
}

namespace {

Eigen::MatrixXd functional_matrix(const KernelSpec& spec, const DyadicBasis& basis, Execution exec) {
  const std::size_t m = basis.size();
  std::vector<CoefficientFunctional> mu;
  mu.reserve(m);
  for (std::size_t p = 0; p < m; ++p) mu.push_back(basis.functional(p));
  Eigen::MatrixXd t(m, m);
  const long n = static_cast<long>(m);
  auto row = [&](long p) {
    for (long q = 0; q <= p; ++q) {
      const double v = kernel_pairing(spec, mu[p], mu[q]);
      t(p, q) = v;
      t(q, p) = v;
    }
  };
  if (exec == Execution::serial) {
    for (long p = 0; p < n; ++p) row(p);
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (long p = 0; p < n; ++p) row(p);
  }
  return t;
}

// Accumulates sum over nodes of w(x) f_p(x) f_q(x).
template <class Visit>
Eigen::MatrixXd weighted_gram(const DyadicBasis& basis, Visit&& for_each_node) {
  const std::size_t m = basis.size();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  std::vector<std::pair<std::size_t, double>> sup;
  for_each_node([&](std::span<const double> x, double w) {
    if (w == 0.0) return;
    basis.supported(x, sup);
    for (const auto& [p, vp] : sup)
      for (const auto& [q, vq] : sup) g(p, q) += w * vp * vq;
  });
  return g;
}

Eigen::MatrixXd white_noise_gram(const BaseMeasure& base, const DyadicBasis& basis, Execution exec) {
  const std::size_t m = basis.size();
  const int dim = basis.dim();
  if (std::holds_alternative<Lebesgue>(base.kind)) {
    Eigen::MatrixXd g(m, m);
    const long n = static_cast<long>(m);
    auto row = [&](long p) {
      for (long q = 0; q <= p; ++q) {
        const double v = hat_product_integral(basis.index(p), basis.index(q));
        g(p, q) = v;
        g(q, p) = v;
      }
    };
    if (exec == Execution::serial) {
      for (long p = 0; p < n; ++p) row(p);
    } else {
#pragma omp parallel for schedule(dynamic, 8)
      for (long p = 0; p < n; ++p) row(p);
    }
    return g;
  }
  if (const auto* c = std::get_if<Counting>(&base.kind)) {
    return weighted_gram(basis, [&](auto&& visit) {
      for (const auto& pt : c->points) visit(std::span<const double>(pt), 1.0);
    });
  }
  const auto& dens = std::get<Density>(base.kind);
  const int cells = 1 << (basis.k_max() + 4);
  return weighted_gram(basis, [&](auto&& visit) {
    const double h = 1.0 / cells;
    long total = 1;
    for (int i = 0; i < dim; ++i) total *= cells;
    double vol = 1.0;
    for (int i = 0; i < dim; ++i) vol *= h;
    std::vector<double> x(dim);
    for (long lin = 0; lin < total; ++lin) {
      long r = lin;
      for (int i = dim - 1; i >= 0; --i) {
        x[i] = (static_cast<double>(r % cells) + 0.5) * h;
        r /= cells;
      }
      const double d = dens.density(x);
      if (d < 0.0) throw std::invalid_argument("negative density in base measure");
      visit(std::span<const double>(x), vol * d);
    }
  });
}

double hoelder_grid_norm(const DyadicBasis& basis, std::span<const double> coeffs) {
  GridValues grid;
  grid.dim = basis.dim();
  grid.resolution = basis.k_max() + 2;
  const std::size_t n = grid_size(grid.dim, grid.resolution, std::size_t{1} << 26);
  grid.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) grid.values[i] = basis.synthesize(coeffs, grid.node(i));
  const double alpha = basis.alpha() > 0.0 ? basis.alpha() : 1.0;
  // Each call may run inside an outer parallel loop over terms.
  const Execution exec = omp_in_parallel() ? Execution::serial : Execution::parallel;
  return std::max(sup_norm(grid), holder_seminorm(grid, alpha, exec));
}

double total_variation(const DyadicBasis& basis, std::span<const double> coeffs, const BaseMeasure& base) {
  const int dim = basis.dim();
  if (const auto* c = std::get_if<Counting>(&base.kind)) {
    double s = 0.0;
    for (const auto& pt : c->points) s += std::abs(basis.synthesize(coeffs, pt));
    return s;
  }
  if (std::holds_alternative<Lebesgue>(base.kind) && dim == 1) {
    // Density is linear on each level-k_max cell: integrate |.| exactly.
    const long cells = 1L << basis.k_max();
    const double h = 1.0 / static_cast<double>(cells);
    double s = 0.0;
    double a = basis.synthesize(coeffs, std::vector<double>{0.0});
    for (long i = 1; i <= cells; ++i) {
      const double b = basis.synthesize(coeffs, std::vector<double>{static_cast<double>(i) * h});
      if ((a >= 0.0) == (b >= 0.0) || a == 0.0 || b == 0.0)
        s += 0.5 * h * (std::abs(a) + std::abs(b));
      else
        s += 0.5 * h * (a * a + b * b) / (std::abs(a) + std::abs(b));
      a = b;
    }
    return s;
  }
  const PointFunction dens = [&](std::span<const double> x) { return std::abs(basis.synthesize(coeffs, x)); };
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  return l2_pairing(base, dim, dens, one, QuadratureOptions{1 << (basis.k_max() + 4)});
}

}  // namespace

TensorCoefficients tensor_coefficients(const KernelSpec& spec, int dim, int k_max, double alpha,
                                       TensorOptions opts) {
  if (spec.dim != dim) throw std::invalid_argument("kernel dimension does not match dim");
  const std::size_t m = dyadic_count(dim, k_max);
  if (m > opts.cap)
    throw std::length_error("basis size " + std::to_string(m) + " exceeds the configured cap " +
                            std::to_string(opts.cap));
  TensorCoefficients tc;
  tc.kernel = spec.to_string();
  if (const auto* wn = std::get_if<WhiteNoise>(&spec.family)) {
    tc.meta = {dim, k_max, 0.0};
    tc.space = Space::measure;
    tc.base = wn->base;
    tc.matrix = white_noise_gram(wn->base, DyadicBasis(dim, k_max, 0.0), opts.exec);
  } else {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    tc.meta = {dim, k_max, alpha};
    tc.space = Space::hoelder;
    tc.matrix = functional_matrix(spec, DyadicBasis(dim, k_max, alpha), opts.exec);
  }
  tc.matrix = 0.5 * (tc.matrix + tc.matrix.transpose()).eval();
  if (!tc.matrix.allFinite()) throw std::runtime_error("non-finite tensor coefficient");
  return tc;
}

Eigen::VectorXd apply_cov(const TensorCoefficients& tc, const Eigen::VectorXd& eta_coeffs) {
  if (static_cast<std::size_t>(eta_coeffs.size()) != tc.size())
    throw std::invalid_argument("coefficient vector length does not match the basis");
  return tc.matrix * eta_coeffs;
}

double coefficient_norm(const BasisMeta& meta, Space space, std::span<const double> coeffs, NormMode mode,
                        const BaseMeasure* base) {
  switch (mode) {
    case NormMode::coefficient_euclidean: {
      double s = 0.0;
      for (double c : coeffs) s += c * c;
      return std::sqrt(s);
    }
    case NormMode::grid_hoelder:
      if (space != Space::hoelder) throw std::invalid_argument("grid-hoelder norm needs the Hoelder space");
      return hoelder_grid_norm(DyadicBasis(meta.dim, meta.k_max, meta.alpha), coeffs);
    case NormMode::total_variation:
      if (space != Space::measure || base == nullptr)
        throw std::invalid_argument("total-variation norm needs a measure space and its base");
      return total_variation(DyadicBasis(meta.dim, meta.k_max, 0.0), coeffs, *base);
  }
  throw std::invalid_argument("unknown norm mode");
}

Decomposition biorthogonalize(const TensorCoefficients& tc, double pivot_tol, NormMode norm_mode) {
  const Eigen::MatrixXd& t = tc.matrix;
  const long m = t.rows();
  if (t.cols() != m) throw std::invalid_argument("tensor coefficient matrix must be square");
  if ((t - t.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, t.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("tensor coefficient matrix is not symmetric");
  if (norm_mode == NormMode::grid_hoelder && tc.space != Space::hoelder)
    throw std::invalid_argument("grid-hoelder norm needs the Hoelder space");
  if (norm_mode == NormMode::total_variation && tc.space != Space::measure)
    throw std::invalid_argument("total-variation norm needs a measure space");

  Eigen::VectorXd diag = t.diagonal();
  const double max_diag = m > 0 ? diag.maxCoeff() : 0.0;
  const double tol = pivot_tol > 0.0 ? pivot_tol : 1e-12 * std::max(max_diag, 0.0);

  std::vector<char> selected(m, 0);
  std::vector<Eigen::VectorXd> vs, ls;
  std::vector<double> ss;
  Decomposition d;
  d.meta = tc.meta;
  d.space = tc.space;
  d.norm_mode = norm_mode;
  d.pivot_tol = tol;
  d.kernel = tc.kernel;

  while (true) {
    long p = -1;
    double best = 0.0;
    for (long q = 0; q < m; ++q) {
      if (selected[q]) continue;
      if (diag[q] < -tol) throw std::runtime_error("kernel not positive semidefinite at this truncation");
      if (p < 0 || diag[q] > best) {
        p = q;
        best = diag[q];
      }
    }
    if (p < 0 || best <= tol) break;
    selected[p] = 1;

    // Eliminate previous directions from e_p in the C-inner product, twice.
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    u[p] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < vs.size(); ++j) u -= (ls[j].dot(u) / ss[j]) * vs[j];
    const Eigen::VectorXd tu = t * u;
    const double s2 = u.dot(tu);
    if (!(s2 > tol)) continue;
    const double s = std::sqrt(s2);
    Eigen::VectorXd l = tu / s;
    diag -= l.cwiseProduct(l);
    d.pivots.push_back(best);
    vs.push_back(std::move(u));
    ls.push_back(std::move(l));
    ss.push_back(s);
  }

  // Smallest pivot seen, counting the unselected remainder (clamped to 0).
  double min_seen = d.pivots.empty() ? 0.0 : *std::min_element(d.pivots.begin(), d.pivots.end());
  for (long q = 0; q < m; ++q) {
    if (selected[q]) continue;
    min_seen = std::min(min_seen, diag[q]);
    if (diag[q] < 0.0) ++d.report.clamped;
  }
  d.report.min_pivot_before_clamp = min_seen;

  // Raw direction per term: Hoelder -> C eta_i coefficients (l_i);
  // measure -> density v_i / s_i of C eta_i against the base.
  const std::size_t r = vs.size();
  std::vector<Eigen::VectorXd> raw(r);
  for (std::size_t i = 0; i < r; ++i) raw[i] = tc.space == Space::hoelder ? ls[i] : Eigen::VectorXd(vs[i] / ss[i]);
  std::vector<double> norms(r);
  const BaseMeasure* base = tc.base ? &*tc.base : nullptr;
  const long rl = static_cast<long>(r);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < rl; ++i)
    norms[i] = coefficient_norm(tc.meta, tc.space, std::span<const double>(raw[i].data(), m), norm_mode, base);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < r; ++i)
    if (norms[i] > 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  d.phis.resize(static_cast<long>(order.size()), m);
  d.etas.resize(static_cast<long>(order.size()), m);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    d.lambdas.push_back(norms[i] * norms[i]);
    d.phis.row(static_cast<long>(k)) = (raw[i] / norms[i]).transpose();
    d.etas.row(static_cast<long>(k)) = (vs[i] * (norms[i] / ss[i])).transpose();
  }
  const double keep_min = d.report.min_pivot_before_clamp;
  const std::size_t keep_clamped = d.report.clamped;
  d.report = verify_biorthogonality(d, tc);
  d.report.min_pivot_before_clamp = keep_min;
  d.report.clamped = keep_clamped;
  return d;
}

BiorthogonalityReport verify_biorthogonality(const Decomposition& d, const TensorCoefficients& tc) {
  BiorthogonalityReport rep = d.report;
  const long r = static_cast<long>(d.terms());
  if (r == 0) {
    rep.max_off_diagonal = 0.0;
    rep.max_diagonal_error = 0.0;
    rep.lambda_min = rep.lambda_max = 0.0;
    rep.reconstruction_residual = tc.matrix.size() ? tc.matrix.cwiseAbs().maxCoeff() : 0.0;
    return rep;
  }
  const Eigen::MatrixXd b = d.etas * tc.matrix * d.etas.transpose();
  rep.max_off_diagonal = 0.0;
  rep.max_diagonal_error = 0.0;
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < r; ++j)
      if (i != j) rep.max_off_diagonal = std::max(rep.max_off_diagonal, std::abs(b(i, j)));
  const double lambda1 = d.lambdas.front();
  for (long i = 0; i < r; ++i)
    rep.max_diagonal_error = std::max(rep.max_diagonal_error, std::abs(b(i, i) - d.lambdas[i]) / lambda1);
  rep.lambda_max = *std::max_element(d.lambdas.begin(), d.lambdas.end());
  rep.lambda_min = *std::min_element(d.lambdas.begin(), d.lambdas.end());

  // Coordinates of sqrt(lambda_i) phi_i in the functional system.
  Eigen::MatrixXd a = d.phis.transpose();
  if (d.space == Space::measure) a = tc.matrix * a;
  for (long i = 0; i < r; ++i) a.col(i) *= std::sqrt(d.lambdas[i]);
  rep.reconstruction_residual = (a * a.transpose() - tc.matrix).cwiseAbs().maxCoeff();
  return rep;
}

Decomposition truncate_energy(const Decomposition& d, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("energy cutoff must lie in [0,1)");
  const double total = d.lambda_sum();
  std::size_t keep = d.terms();
  if (eps > 0.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.terms(); ++i) {
      acc += d.lambdas[i];
      if (acc >= (1.0 - eps) * total) {
        keep = i + 1;
        break;
      }
    }
  }
  Decomposition out = d;
  out.lambdas.resize(keep);
  out.phis = d.phis.topRows(static_cast<long>(keep));
  out.etas = d.etas.topRows(static_cast<long>(keep));
  return out;
}

DyadicBasis basis_of(const Decomposition& d) {
  return DyadicBasis(d.meta.dim, d.meta.k_max, d.space == Space::measure ? 0.0 : d.meta.alpha);
}

double eval_phi(const Decomposition& d, const DyadicBasis& basis, std::size_t i, std::span<const double> x) {
  const auto row = d.phis.row(static_cast<long>(i));
  return basis.synthesize(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), x);
}

Eigen::MatrixXd pairing_table(const Decomposition& d, const std::vector<CoefficientFunctional>& functionals) {
  if (d.space != Space::hoelder)
    throw std::invalid_argument("Dirac-combination pairings need a Hoelder-space decomposition");
  const DyadicBasis basis = basis_of(d);
  Eigen::MatrixXd p(static_cast<long>(d.terms()), static_cast<long>(functionals.size()));
  const long r = static_cast<long>(d.terms());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < r; ++i)
    for (std::size_t f = 0; f < functionals.size(); ++f)
      p(i, static_cast<long>(f)) = apply_functional(
          functionals[f], [&](std::span<const double> x) { return eval_phi(d, basis, static_cast<std::size_t>(i), x); });
  return p;
}

double decomposition_covariance(const Decomposition& d, const CoefficientFunctional& eta,
                                const CoefficientFunctional& eta_prime) {
  const Eigen::MatrixXd p = pairing_table(d, {eta, eta_prime});
  double acc = 0.0;
  for (std::size_t i = 0; i < d.terms(); ++i) acc += d.lambdas[i] * p(static_cast<long>(i), 0) * p(static_cast<long>(i), 1);
  return acc;
}

}  // namespace gfield
