#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gfield/dyadic.hpp"

namespace gfield {

using PointFunction = std::function<double(std::span<const double>)>;

struct Lebesgue {};

/// Base measure d(x) dx on [0,1]^n with a nonnegative density.
struct Density {
  PointFunction density;
  std::string name = "density";
};

/// Counting measure on a finite list of points.
struct Counting {
  std::vector<std::vector<double>> points;
};

struct BaseMeasure {
  std::variant<Lebesgue, Density, Counting> kind;

  std::string name() const;
};

struct ExpAlpha {
  double alpha = 0.5;
};

struct GaussianSE {
  double scale = 1.0;
};

struct WhiteNoise {
  BaseMeasure base;
};

/// Tabulated symmetric kernel on the uniform grid of `points_per_axis`
/// nodes per axis, multilinear in each argument. `values` is row-major over
/// (node of x, node of y), nodes enumerated with the first axis slowest.
struct GridKernel {
  int points_per_axis = 2;
  std::vector<double> values;
};

struct KernelSpec {
  std::variant<ExpAlpha, GaussianSE, WhiteNoise, GridKernel> family;
  int dim = 1;

  bool pointwise() const { return !std::holds_alternative<WhiteNoise>(family); }
  /// Canonical grammar string, e.g. "exp-alpha:0.5".
  std::string to_string() const;
};

/// Parses `exp-alpha:<a>`, `gaussian-se:<scale>`, `white-noise:lebesgue`,
/// `white-noise:counting:<x;x;...>` (coordinates of one point comma separated),
/// `white-noise:density:affine:<c0,c1,...,cn>` and `grid-kernel:<csv path>`.
/// Throws std::invalid_argument on malformed input.
KernelSpec parse_kernel(const std::string& text, int dim);

/// Validates family parameters (ranges, grid sizes, symmetry of tables).
void validate(const KernelSpec& spec);

/// Pointwise kernel value. WhiteNoise throws std::invalid_argument.
double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// sum_p sum_q w_p w_q c(x_p, y_q).
double kernel_pairing(const KernelSpec& spec, const CoefficientFunctional& a,
                      const CoefficientFunctional& b);

struct QuadratureOptions {
  /// Cells per axis for composite rules on [0,1]^n.
  int cells_per_axis = 64;
};

/// Integral of f * g against the base measure.
///  Lebesgue: composite 3-point Gauss-Legendre per axis on cells_per_axis
///            cells (exact for piecewise polynomials of degree <= 5 per axis
///            aligned with that grid).
///  Density:  composite midpoint on cells_per_axis cells per axis.
///  Counting: finite sum.
double l2_pairing(const BaseMeasure& base, int dim, const PointFunction& f,
                  const PointFunction& g, QuadratureOptions opts = {});

/// Total mass of the base measure on [0,1]^dim (throws if not > 0 or if a
/// density is negative on the quadrature nodes).
double total_mass(const BaseMeasure& base, int dim, QuadratureOptions opts = {});

/// Exact Lebesgue integral of the product of two un-renormalised hat
/// functions f_a * f_b over [0,1]^n (product of 1D piecewise-quadratic
/// integrals, each evaluated with Simpson's rule between merged breakpoints).
double hat_product_integral(const DyadicIndex& a, const DyadicIndex& b);

}  // namespace gfield
