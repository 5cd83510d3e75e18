#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gfield/decomp.hpp"
#include "gfield/kernels.hpp"
#include "gfield/sampler.hpp"

namespace gfield {

/// Density w.r.t. the base measure, as coefficients over the plain hats.
struct DensityOnGrid {
  BasisMeta meta;
  std::vector<double> coeffs;

  double density(std::span<const double> x) const;
};

/// Weighted Dirac masses, used for counting-measure bases.
struct AtomList {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};

struct MeasureSample {
  std::variant<DensityOnGrid, AtomList> representation;
  BaseMeasure base;
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;
  std::string rng = NormalStream::kAlgorithm;
};

/// Biorthogonalises the L^2(base) Gram matrix of the plain hats up to k_max.
/// Lambdas use the total-variation norm of the densities.
Decomposition whitenoise_decomposition(const BaseMeasure& base, int dim, int k_max, TensorOptions opts = {});

MeasureSample sample_measure_field(const Decomposition& d, const BaseMeasure& base, std::uint64_t seed,
                                   std::uint64_t stream_index);

/// <test, theta>: integral of test * density against the base, or a sum over atoms.
double pair_measure(const MeasureSample& m, const PointFunction& test);

/// <test_f, phi_i> for every term i (rows) and test function f (columns).
Eigen::MatrixXd measure_pairing_table(const Decomposition& d, const BaseMeasure& base,
                                      const std::vector<PointFunction>& tests);

/// Quadrature used for densities from a decomposition at level k_max:
/// Lebesgue cells aligned with the finest hats, density bases on 2^(k_max+4) cells.
QuadratureOptions measure_quadrature(const BaseMeasure& base, int k_max);

/// Writes each sample's density on the uniform grid of the given resolution
/// (or its atom list for counting bases) as consecutive blocks under one
/// header, preceded by `# key = value` metadata lines naming the base measure.
void write_measure_csv(std::ostream& out, const std::vector<MeasureSample>& samples, int resolution);

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int order);

/// The measure-valued density z -> k * N(z, Id)(. intersected with [0,1]^dim)
/// representing the square-exponential covariance on measures. The constant k
/// is a free parameter; k = (2 pi)^(dim/2) matches gaussian-se:1.
struct GaussianRepresentingMeasure {
  int dim = 1;
  double k = 1.0;

  /// Mass of the truncated measure at z (product of erf differences).
  double mass(std::span<const double> z) const;
  /// Integral of test against the truncated measure at z.
  double pair(std::span<const double> z, const PointFunction& test) const;
};

/// <eta2, C eta1> = integral of eta1(z) <eta2, g(z)> dz over [0,1]^dim.
double representing_measure_pairing(const GaussianRepresentingMeasure& g, const PointFunction& eta1,
                                    const PointFunction& eta2);

/// Double integral of f(x) g(y) c(x, y) over [0,1]^dim x [0,1]^dim for a
/// pointwise kernel, by composite Gauss quadrature in each argument.
double kernel_integral_pairing(const KernelSpec& spec, const PointFunction& f, const PointFunction& g,
                               QuadratureOptions opts = {});

}  // namespace gfield
