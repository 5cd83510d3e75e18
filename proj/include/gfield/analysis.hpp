#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gfield/decomp.hpp"
#include "gfield/grid.hpp"
#include "gfield/kernels.hpp"
#include "gfield/sampler.hpp"

namespace gfield {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Mean of a[i] * b[i] with standard error sd / sqrt(N). Needs N >= 2.
Estimate cross_moment(std::span<const double> a, std::span<const double> b);

/// E[<eta1, theta><eta2, theta>] over the given samples.
Estimate empirical_covariance(const std::vector<FieldSample>& samples, const Decomposition& d,
                              const CoefficientFunctional& eta1, const CoefficientFunctional& eta2);

struct MomentSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double skewness_se = 0.0;  // standard error under normality
  double kurtosis_se = 0.0;
};

MomentSummary moments(std::span<const double> x);

/// Max |increment| at lag 2^-j along the axes, for j = j_min..j_max.
std::vector<double> max_increments(const GridValues& grid, int j_min, int j_max);

/// Least-squares slope of log(max increment at lag 2^-j) against -j log 2.
/// Default lags j = 2..resolution-1. Returns +infinity when every increment
/// is zero. Needs resolution >= 4.
double estimate_holder_exponent(const GridValues& grid, int j_min = 2, int j_max = -1);

/// c(., y0) on the uniform grid of the given resolution.
GridValues kernel_section(const KernelSpec& spec, std::span<const double> y0, int resolution);

/// S_K = sum over pairs with max(level) = K of |<mu_p (x) mu_q, c>|, using
/// gamma-renormalised functionals. `transposed` evaluates c(y, x) instead.
std::vector<double> besov_partial_sums(const KernelSpec& spec, int dim, int k_max, double gamma,
                                       bool transposed = false, Execution exec = Execution::parallel);

/// ratios[K] = S_K / S_{K-1} for K >= 1 (ratios[0] is unused and set to 0).
std::vector<double> level_ratios(const std::vector<double>& sums);

/// Geometric grid of n >= 2 nodes from t_min to 1.
std::vector<double> log_grid(double t_min, int n);

struct BesovEstimate {
  double l1_norm = 0.0;
  double integral = 0.0;  // integral of t^-gamma omega(t) dt / t over the t grid
  double value = 0.0;     // l1_norm + integral
  std::vector<double> omega;
};

struct BesovOptions {
  /// Midpoint cells per axis of [0,1]^(2 dim).
  int cells_per_axis = 128;
};

/// Besov B^gamma_{1,1} estimate of the kernel as a function on
/// [0,1]^dim x [0,1]^dim. omega(t) is the largest L^1 difference over shifts
/// of length t along the coordinate axes and the diagonal directions
/// (all sign patterns of (1,...,1)/sqrt(2 dim) with a positive first entry),
/// made nondecreasing in t. The t integral is trapezoidal in log t.
BesovEstimate besov_norm_estimate(const KernelSpec& spec, double gamma, std::span<const double> t_grid,
                                  BesovOptions opts = {});

/// Weights beta_i = 2^-i normalised over the list.
std::vector<double> dyadic_betas(std::size_t n);

struct WeakStarNorm {
  std::vector<CoefficientFunctional> functionals;
  std::vector<double> betas;

  /// The functionals mu_tau up to k_max, each divided by its total absolute
  /// weight, with dyadic_betas.
  static WeakStarNorm dyadic(int dim, int k_max, double alpha);
};

/// sum_i beta_i |pairings[i]|.
double weak_star_norm(const WeakStarNorm& w, std::span<const double> pairings);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::vector<double> a, std::vector<double> b);

using PointKernel = std::function<double(std::span<const double>, std::span<const double>)>;

struct NystromDecomposition {
  int dim = 1;
  std::vector<std::vector<double>> grid;
  std::vector<double> weights;
  std::vector<double> eigenvalues;  // nonincreasing
  Eigen::MatrixXd eigenvectors;     // column i: e_i at the grid, sum_j w_j e_i e_k = delta_ik
  double weighted_trace = 0.0;      // sum_j w_j c(x_j, x_j)
};

/// Midpoint grid of n points per axis with equal weights.
NystromDecomposition nystrom_mercer(const PointKernel& kernel, int dim, int n);
NystromDecomposition nystrom_mercer(const KernelSpec& spec, int n);
/// Eigendecomposition of W^1/2 K W^1/2. Throws std::invalid_argument when K is
/// not symmetric.
NystromDecomposition nystrom_from_matrix(std::vector<std::vector<double>> grid, std::vector<double> weights,
                                         const Eigen::MatrixXd& k);

/// Number of leading eigenvalues above rel_tol * largest.
std::size_t nystrom_rank(const NystromDecomposition& nd, double rel_tol = 1e-10);

/// Table (i, f) = e_i(points[f]) for i < terms, by Nystrom extension
/// e_i(x) = sum_j w_j c(x, x_j) e_i(x_j) / lambda_i.
Eigen::MatrixXd nystrom_table(const NystromDecomposition& nd, const PointKernel& kernel,
                              const std::vector<std::vector<double>>& points, std::size_t terms);

PointKernel point_kernel(const KernelSpec& spec);

struct Triple {
  std::vector<double> x, x_prime, y;
};

struct SandwichTerms {
  double quotient = 0.0;  // |e^{-d^2a(x,y)} - e^{-d^2a(x',y)}| / d^a(x,x')
  double lower = 0.0;     // (d^a(x',y) + d^a(x,y)) e^{-max(d(x,y), d(x',y))^2a}
  double upper = 0.0;     // (d^a(x',y) + d^a(x,y)) e^{-min(d(x,y), d(x',y))^2a}
};

SandwichTerms sandwich_terms(double alpha, const Triple& t);

struct SandwichReport {
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // x == x'
  std::size_t lower_violations = 0;
  std::size_t upper_violations = 0;
  double max_lower_violation = 0.0;
  double max_upper_violation = 0.0;
};

SandwichReport sandwich_check(double alpha, const std::vector<Triple>& triples, double tol = 1e-12);

/// Uniform triples in [0,1]^dim from NormalStream(seed, 0) uniforms.
std::vector<Triple> random_triples(int dim, std::size_t n, std::uint64_t seed);

}  // namespace gfield
