#include "gfield/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gfield {

Estimate cross_moment(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pairing series of different length");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("need at least two samples");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] * b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dv = a[i] * b[i] - mean;
    ss += dv * dv;
  }
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

Estimate empirical_covariance(const std::vector<FieldSample>& samples, const Decomposition& d,
                              const CoefficientFunctional& eta1, const CoefficientFunctional& eta2) {
  if (samples.size() < 2) throw std::invalid_argument("need at least two samples");
  std::vector<double> a, b;
  a.reserve(samples.size());
  b.reserve(samples.size());
  for (const auto& s : samples) {
    const SampledField f(s, d);
    a.push_back(f.pair(eta1));
    b.push_back(f.pair(eta2));
  }
  return cross_moment(a, b);
}

MomentSummary moments(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) throw std::invalid_argument("need at least four values");
  MomentSummary m;
  m.n = n;
  const double nd = static_cast<double>(n);
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  m.variance = m2 * nd / (nd - 1.0);
  m.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  m.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  m.skewness_se = std::sqrt(6.0 * nd * (nd - 1.0) / ((nd - 2.0) * (nd + 1.0) * (nd + 3.0)));
  m.kurtosis_se = 2.0 * m.skewness_se * std::sqrt((nd * nd - 1.0) / ((nd - 3.0) * (nd + 5.0)));
  return m;
}

std::vector<double> max_increments(const GridValues& grid, int j_min, int j_max) {
  const int res = grid.resolution;
  if (grid.values.empty()) throw std::invalid_argument("empty grid");
  if (j_min < 0 || j_max > res || j_min > j_max) throw std::invalid_argument("lag range outside the grid");
  const std::size_t ppa = grid.points_per_axis();
  const std::size_t total = grid.size();
  std::vector<double> out;
  for (int j = j_min; j <= j_max; ++j) {
    const std::size_t step = std::size_t{1} << (res - j);
    double best = 0.0;
    std::size_t stride = 1;
    for (int axis = grid.dim - 1; axis >= 0; --axis) {
      for (std::size_t i = 0; i < total; ++i) {
        const std::size_t coord = (i / stride) % ppa;
        if (coord + step >= ppa) continue;
        best = std::max(best, std::abs(grid.values[i + step * stride] - grid.values[i]));
      }
      stride *= ppa;
    }
    out.push_back(best);
  }
  return out;
}

double estimate_holder_exponent(const GridValues& grid, int j_min, int j_max) {
  if (grid.resolution < 4) throw std::invalid_argument("exponent estimate needs resolution >= 4");
  if (j_max < 0) j_max = grid.resolution - 1;
  const std::vector<double> inc = max_increments(grid, j_min, j_max);
  std::vector<double> xs, ys;
  for (int j = j_min; j <= j_max; ++j) {
    const double v = inc[static_cast<std::size_t>(j - j_min)];
    if (v > 0.0) {
      xs.push_back(-j * std::log(2.0));
      ys.push_back(std::log(v));
    }
  }
  if (xs.empty()) return std::numeric_limits<double>::infinity();
  if (xs.size() < 2) throw std::invalid_argument("too few nonzero increments for a regression");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

GridValues kernel_section(const KernelSpec& spec, std::span<const double> y0, int resolution) {
  GridValues g;
  g.dim = spec.dim;
  g.resolution = resolution;
  g.values.resize(grid_size(g.dim, resolution, std::size_t{1} << 24));
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = eval_kernel(spec, g.node(i), y0);
  return g;
}

std::vector<double> besov_partial_sums(const KernelSpec& spec, int dim, int k_max, double gamma, bool transposed,
                                       Execution exec) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (!spec.pointwise()) throw std::invalid_argument("kernel is measure-valued; use pairing operations");
  if (spec.dim != dim) throw std::invalid_argument("kernel dimension does not match dim");
  const DyadicBasis basis(dim, k_max, gamma);
  const long m = static_cast<long>(basis.size());
  std::vector<CoefficientFunctional> fs;
  for (long p = 0; p < m; ++p) fs.push_back(basis.functional(static_cast<std::size_t>(p)));
  // Per-row partial sums by level keep the final reduction order fixed.
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(m, k_max + 1);
  auto row = [&](long p) {
    for (long q = 0; q < m; ++q) {
      const double v = transposed ? kernel_pairing(spec, fs[q], fs[p]) : kernel_pairing(spec, fs[p], fs[q]);
      const int k = std::max(basis.level(static_cast<std::size_t>(p)), basis.level(static_cast<std::size_t>(q)));
      rows(p, k) += std::abs(v);
    }
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long p = 0; p < m; ++p) row(p);
  } else {
    for (long p = 0; p < m; ++p) row(p);
  }
  std::vector<double> sums(static_cast<std::size_t>(k_max + 1), 0.0);
  for (long p = 0; p < m; ++p)
    for (int k = 0; k <= k_max; ++k) sums[static_cast<std::size_t>(k)] += rows(p, k);
  return sums;
}

std::vector<double> level_ratios(const std::vector<double>& sums) {
  std::vector<double> r(sums.size(), 0.0);
  for (std::size_t k = 1; k < sums.size(); ++k)
    r[k] = sums[k - 1] > 0.0 ? sums[k] / sums[k - 1] : std::numeric_limits<double>::infinity();
  return r;
}

std::vector<double> log_grid(double t_min, int n) {
  if (!(t_min > 0.0 && t_min < 1.0) || n < 2) throw std::invalid_argument("log grid needs t_min in (0,1), n >= 2");
  std::vector<double> t(static_cast<std::size_t>(n));
  const double a = std::log(t_min);
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = std::exp(a * (1.0 - static_cast<double>(i) / (n - 1)));
  t.back() = 1.0;
  return t;
}

BesovEstimate besov_norm_estimate(const KernelSpec& spec, double gamma, std::span<const double> t_grid,
                                  BesovOptions opts) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (!spec.pointwise()) throw std::invalid_argument("kernel is measure-valued; use pairing operations");
  if (t_grid.size() < 2) throw std::invalid_argument("t grid needs at least two nodes");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (!(t_grid[i] > 0.0 && t_grid[i] <= 1.0) || (i && t_grid[i] <= t_grid[i - 1]))
      throw std::invalid_argument("t grid must increase within (0,1]");
  const int n = spec.dim;
  const int dd = 2 * n;
  const int q = opts.cells_per_axis;
  std::size_t cells = 1;
  for (int i = 0; i < dd; ++i) cells *= static_cast<std::size_t>(q);
  if (cells > (std::size_t{1} << 26)) throw std::length_error("Besov quadrature grid too large");

  std::vector<std::vector<double>> dirs;
  for (int i = 0; i < dd; ++i) {
    std::vector<double> e(static_cast<std::size_t>(dd), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    dirs.push_back(e);
  }
  for (unsigned mask = 0; mask < (1u << (dd - 1)); ++mask) {
    std::vector<double> e(static_cast<std::size_t>(dd), 1.0 / std::sqrt(static_cast<double>(dd)));
    for (int i = 1; i < dd; ++i)
      if (mask & (1u << (i - 1))) e[static_cast<std::size_t>(i)] = -e[static_cast<std::size_t>(i)];
    dirs.push_back(e);
  }

  const double h = 1.0 / q;
  const double vol = std::pow(h, dd);
  auto c = [&](const std::vector<double>& z) {
    return eval_kernel(spec, std::span<const double>(z.data(), static_cast<std::size_t>(n)),
                       std::span<const double>(z.data() + n, static_cast<std::size_t>(n)));
  };
  auto midpoint = [&](std::size_t lin, std::vector<double>& z) {
    for (int i = dd - 1; i >= 0; --i) {
      z[static_cast<std::size_t>(i)] = (static_cast<double>(lin % static_cast<std::size_t>(q)) + 0.5) * h;
      lin /= static_cast<std::size_t>(q);
    }
  };

  BesovEstimate out;
  {
    std::vector<double> z(static_cast<std::size_t>(dd));
    for (std::size_t lin = 0; lin < cells; ++lin) {
      midpoint(lin, z);
      out.l1_norm += std::abs(c(z)) * vol;
    }
  }
  const long nt = static_cast<long>(t_grid.size());
  out.omega.assign(t_grid.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (long ti = 0; ti < nt; ++ti) {
    const double t = t_grid[static_cast<std::size_t>(ti)];
    std::vector<double> z(static_cast<std::size_t>(dd)), zs(static_cast<std::size_t>(dd));
    double best = 0.0;
    for (const auto& e : dirs) {
      double acc = 0.0;
      for (std::size_t lin = 0; lin < cells; ++lin) {
        midpoint(lin, z);
        bool inside = true;
        for (int i = 0; i < dd && inside; ++i) {
          zs[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + t * e[static_cast<std::size_t>(i)];
          inside = zs[static_cast<std::size_t>(i)] >= 0.0 && zs[static_cast<std::size_t>(i)] <= 1.0;
        }
        if (inside) acc += std::abs(c(zs) - c(z)) * vol;
      }
      best = std::max(best, acc);
    }
    out.omega[static_cast<std::size_t>(ti)] = best;
  }
  for (std::size_t i = 1; i < out.omega.size(); ++i) out.omega[i] = std::max(out.omega[i], out.omega[i - 1]);
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
    const double g0 = std::pow(t_grid[i], -gamma) * out.omega[i];
    const double g1 = std::pow(t_grid[i + 1], -gamma) * out.omega[i + 1];
    out.integral += 0.5 * (g0 + g1) * (std::log(t_grid[i + 1]) - std::log(t_grid[i]));
  }
  out.value = out.l1_norm + out.integral;
  return out;
}

std::vector<double> dyadic_betas(std::size_t n) {
  std::vector<double> b(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(i + 1, 1000)));
    s += b[i];
  }
  for (double& v : b) v /= s;
  return b;
}

WeakStarNorm WeakStarNorm::dyadic(int dim, int k_max, double alpha) {
  const DyadicBasis basis(dim, k_max, alpha);
  WeakStarNorm w;
  for (std::size_t p = 0; p < basis.size(); ++p) {
    const CoefficientFunctional f = basis.functional(p);
    double mass = 0.0;
    for (const auto& a : f.atoms()) mass += std::abs(a.weight);
    w.functionals.push_back(f.scaled(1.0 / mass));
  }
  w.betas = dyadic_betas(w.functionals.size());
  return w;
}

double weak_star_norm(const WeakStarNorm& w, std::span<const double> pairings) {
  if (pairings.size() != w.betas.size()) throw std::invalid_argument("pairings do not match the functionals");
  double s = 0.0;
  for (std::size_t i = 0; i < pairings.size(); ++i) s += w.betas[i] * std::abs(pairings[i]);
  return s;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

PointKernel point_kernel(const KernelSpec& spec) {
  if (!spec.pointwise()) throw std::invalid_argument("kernel is measure-valued; use pairing operations");
  return [spec](std::span<const double> x, std::span<const double> y) { return eval_kernel(spec, x, y); };
}

NystromDecomposition nystrom_from_matrix(std::vector<std::vector<double>> grid, std::vector<double> weights,
                                         const Eigen::MatrixXd& k) {
  const long n = k.rows();
  if (k.cols() != n || static_cast<long>(grid.size()) != n || static_cast<long>(weights.size()) != n)
    throw std::invalid_argument("kernel matrix, grid and weights sizes differ");
  if (n < 2) throw std::invalid_argument("Nystrom needs at least two points");
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < i; ++j)
      if (k(i, j) != k(j, i)) throw std::invalid_argument("kernel matrix is not symmetric");
  Eigen::VectorXd sw(n);
  for (long i = 0; i < n; ++i) {
    if (!(weights[static_cast<std::size_t>(i)] > 0.0)) throw std::invalid_argument("weights must be positive");
    sw[i] = std::sqrt(weights[static_cast<std::size_t>(i)]);
  }
  const Eigen::MatrixXd a = sw.asDiagonal() * k * sw.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  NystromDecomposition nd;
  nd.dim = grid.empty() ? 1 : static_cast<int>(grid.front().size());
  nd.eigenvalues.resize(static_cast<std::size_t>(n));
  nd.eigenvectors.resize(n, n);
  for (long i = 0; i < n; ++i) {
    const long src = n - 1 - i;  // ascending -> nonincreasing
    nd.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()[src];
    nd.eigenvectors.col(i) = es.eigenvectors().col(src).cwiseQuotient(sw);
  }
  for (long i = 0; i < n; ++i) nd.weighted_trace += weights[static_cast<std::size_t>(i)] * k(i, i);
  nd.grid = std::move(grid);
  nd.weights = std::move(weights);
  return nd;
}

NystromDecomposition nystrom_mercer(const PointKernel& kernel, int dim, int n) {
  if (n < 2) throw std::invalid_argument("Nystrom needs N >= 2");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) {
    total *= static_cast<std::size_t>(n);
    if (total > 8192) throw std::length_error("Nystrom grid too large");
  }
  std::vector<std::vector<double>> grid(total, std::vector<double>(static_cast<std::size_t>(dim)));
  for (std::size_t lin = 0; lin < total; ++lin) {
    std::size_t r = lin;
    for (int i = dim - 1; i >= 0; --i) {
      grid[lin][static_cast<std::size_t>(i)] = (static_cast<double>(r % static_cast<std::size_t>(n)) + 0.5) / n;
      r /= static_cast<std::size_t>(n);
    }
  }
  std::vector<double> w(total, 1.0 / static_cast<double>(total));
  const long m = static_cast<long>(total);
  Eigen::MatrixXd k(m, m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i)
    for (long j = 0; j <= i; ++j) k(i, j) = kernel(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]);
  for (long i = 0; i < m; ++i)
    for (long j = i + 1; j < m; ++j) k(i, j) = k(j, i);
  return nystrom_from_matrix(std::move(grid), std::move(w), k);
}

NystromDecomposition nystrom_mercer(const KernelSpec& spec, int n) { return nystrom_mercer(point_kernel(spec), spec.dim, n); }

std::size_t nystrom_rank(const NystromDecomposition& nd, double rel_tol) {
  if (nd.eigenvalues.empty() || !(nd.eigenvalues.front() > 0.0)) return 0;
  std::size_t r = 0;
  while (r < nd.eigenvalues.size() && nd.eigenvalues[r] > rel_tol * nd.eigenvalues.front()) ++r;
  return r;
}

Eigen::MatrixXd nystrom_table(const NystromDecomposition& nd, const PointKernel& kernel,
                              const std::vector<std::vector<double>>& points, std::size_t terms) {
  if (terms > nd.eigenvalues.size()) throw std::invalid_argument("more terms than eigenpairs");
  const long n = static_cast<long>(nd.grid.size());
  Eigen::MatrixXd t(static_cast<long>(terms), static_cast<long>(points.size()));
  for (std::size_t f = 0; f < points.size(); ++f) {
    Eigen::VectorXd kw(n);
    for (long j = 0; j < n; ++j)
      kw[j] = nd.weights[static_cast<std::size_t>(j)] * kernel(points[f], nd.grid[static_cast<std::size_t>(j)]);
    for (std::size_t i = 0; i < terms; ++i)
      t(static_cast<long>(i), static_cast<long>(f)) =
          kw.dot(nd.eigenvectors.col(static_cast<long>(i))) / nd.eigenvalues[i];
  }
  return t;
}

namespace {

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

SandwichTerms sandwich_terms(double alpha, const Triple& t) {
  const double dxy = dist(t.x, t.y);
  const double dpy = dist(t.x_prime, t.y);
  const double dxp = dist(t.x, t.x_prime);
  const double e = 2.0 * alpha;
  SandwichTerms s;
  s.quotient = std::abs(std::exp(-std::pow(dxy, e)) - std::exp(-std::pow(dpy, e))) / std::pow(dxp, alpha);
  const double sum = std::pow(dpy, alpha) + std::pow(dxy, alpha);
  s.lower = sum * std::exp(-std::pow(std::max(dxy, dpy), e));
  s.upper = sum * std::exp(-std::pow(std::min(dxy, dpy), e));
  return s;
}

SandwichReport sandwich_check(double alpha, const std::vector<Triple>& triples, double tol) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
  SandwichReport r;
  for (const auto& t : triples) {
    if (t.x.size() != t.y.size() || t.x_prime.size() != t.y.size()) throw std::invalid_argument("triple dimensions differ");
    if (t.x == t.x_prime) {
      ++r.skipped;
      continue;
    }
    ++r.evaluated;
    const SandwichTerms s = sandwich_terms(alpha, t);
    const double lo = s.lower - s.quotient;
    const double hi = s.quotient - s.upper;
    r.max_lower_violation = std::max(r.max_lower_violation, lo);
    r.max_upper_violation = std::max(r.max_upper_violation, hi);
    if (lo > tol) ++r.lower_violations;
    if (hi > tol) ++r.upper_violations;
  }
  return r;
}

std::vector<Triple> random_triples(int dim, std::size_t n, std::uint64_t seed) {
  const NormalStream rng(seed, 0);
  std::vector<Triple> out(n);
  std::uint64_t k = 0;
  for (auto& t : out) {
    for (auto* v : {&t.x, &t.x_prime, &t.y}) {
      v->resize(static_cast<std::size_t>(dim));
      for (double& c : *v) c = rng.uniform(k++);
    }
  }
  return out;
}

}  // namespace gfield
