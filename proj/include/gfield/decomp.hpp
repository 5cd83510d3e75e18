#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfield/dyadic.hpp"
#include "gfield/grid.hpp"
#include "gfield/kernels.hpp"

namespace gfield {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Which dual pair the coefficient system lives in.
///  hoelder: phis are coefficients over the alpha-renormalised hats, etas over
///           the Dirac-combination functionals.
///  measure: phis are density coefficients (w.r.t. the base measure) over the
///           plain hats, etas are continuous functions over the same hats.
enum class Space { hoelder, measure };

enum class NormMode { grid_hoelder, coefficient_euclidean, total_variation };

std::string to_string(Space s);
std::string to_string(NormMode m);
Space parse_space(const std::string& s);
NormMode parse_norm_mode(const std::string& s);

struct BasisMeta {
  int dim = 1;
  int k_max = 0;
  double alpha = 0.5;
};

struct TensorCoefficients {
  BasisMeta meta;
  Space space = Space::hoelder;
  std::string kernel;
  std::optional<BaseMeasure> base;  // set for white-noise specs
  Eigen::MatrixXd matrix;

  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
};

struct TensorOptions {
  std::size_t cap = 4096;
  Execution exec = Execution::parallel;
};

/// Matrix of pairings <mu_p (x) mu_q, c> over the dyadic system up to k_max.
/// Pointwise kernels use the alpha-renormalised functionals; white-noise
/// kernels give the Gram matrix of the plain hats in L^2(base) (alpha is
/// ignored and recorded as 0). Throws std::length_error when M > opts.cap.
TensorCoefficients tensor_coefficients(const KernelSpec& spec, int dim, int k_max, double alpha,
                                       TensorOptions opts = {});

/// Coefficients of C eta over the basis functions, given eta's coordinates in
/// the functional system.
Eigen::VectorXd apply_cov(const TensorCoefficients& tc, const Eigen::VectorXd& eta_coeffs);

struct BiorthogonalityReport {
  double max_off_diagonal = 0.0;    // max |<eta_i, C eta_j>|, i != j
  double max_diagonal_error = 0.0;  // max |<eta_i, C eta_i> - lambda_i| / lambda_1
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double reconstruction_residual = 0.0;  // max entry of |sum_i a_i a_i^T - T|
  double min_pivot_before_clamp = 0.0;   // smallest remaining diagonal at exit
  std::size_t clamped = 0;
};

struct Decomposition {
  BasisMeta meta;
  Space space = Space::hoelder;
  NormMode norm_mode = NormMode::grid_hoelder;
  double pivot_tol = 0.0;
  std::string kernel;
  std::vector<double> lambdas;      // nonincreasing
  RowMatrix phis;                   // terms x M
  RowMatrix etas;                   // terms x M
  std::vector<double> pivots;       // selected pivot values, selection order
  BiorthogonalityReport report;

  std::size_t terms() const { return lambdas.size(); }
  std::size_t basis_size() const { return static_cast<std::size_t>(phis.cols()); }
  double lambda_sum() const;
  double sqrt_lambda_sum() const;
};

/// Pivoted congruence diagonalisation. pivot_tol <= 0 selects
/// 1e-12 * max initial diagonal. Throws std::runtime_error if a remaining
/// diagonal entry drops below -pivot_tol.
Decomposition biorthogonalize(const TensorCoefficients& tc, double pivot_tol = 0.0,
                              NormMode norm_mode = NormMode::grid_hoelder);

BiorthogonalityReport verify_biorthogonality(const Decomposition& d, const TensorCoefficients& tc);

/// Keeps the smallest prefix whose lambda sum is >= (1 - eps) * total.
Decomposition truncate_energy(const Decomposition& d, double eps);

/// Basis used to synthesise phis of a decomposition (alpha = 0 for measures).
DyadicBasis basis_of(const Decomposition& d);

/// Norm of the function/measure with the given coefficients under `mode`.
/// Measure-space norms need the base measure.
double coefficient_norm(const BasisMeta& meta, Space space, std::span<const double> coeffs, NormMode mode,
                        const BaseMeasure* base = nullptr);

/// phi_i(x) for a Hoelder-space decomposition.
double eval_phi(const Decomposition& d, const DyadicBasis& basis, std::size_t i, std::span<const double> x);

/// <eta_f, phi_i> for each term i (rows) and functional f (columns).
Eigen::MatrixXd pairing_table(const Decomposition& d, const std::vector<CoefficientFunctional>& functionals);

/// Truncated covariance sum_i lambda_i <eta, phi_i> <eta', phi_i>.
double decomposition_covariance(const Decomposition& d, const CoefficientFunctional& eta,
                                const CoefficientFunctional& eta_prime);

/// Structured-text (JSON) serialisation; floats written with 17 significant digits.
void write_decomposition(const Decomposition& d, std::ostream& out);
Decomposition read_decomposition(std::istream& in);
void save_decomposition(const Decomposition& d, const std::string& path);
Decomposition load_decomposition(const std::string& path);

}  // namespace gfield
