#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfield/decomp.hpp"
#include "gfield/grid.hpp"
#include "gfield/rng.hpp"

namespace gfield {

struct FieldSample {
  std::vector<double> coeffs;  // sqrt(lambda_i) * xi_i, one per term
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;
  BasisMeta meta;
  std::string rng = NormalStream::kAlgorithm;
  std::string normal_method = NormalStream::kNormalMethod;
};

/// xi_i is variate i of NormalStream(seed, stream_index).
FieldSample draw_sample(const Decomposition& d, std::uint64_t seed, std::uint64_t stream_index);

/// Basis coefficients of the sample: sum_i coeffs[i] * phis.row(i), summed in
/// term order.
std::vector<double> field_coefficients(const FieldSample& s, const Decomposition& d);

/// A sample bound to its decomposition, with basis coefficients cached.
/// All evaluation goes through DyadicBasis::synthesize, so grid values and
/// point values agree bit for bit.
class SampledField {
 public:
  SampledField(const FieldSample& s, const Decomposition& d);

  double operator()(std::span<const double> x) const;
  double pair(const CoefficientFunctional& eta) const;
  GridValues on_grid(int resolution, std::size_t cap = std::size_t{1} << 24) const;
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  DyadicBasis basis_;
  std::vector<double> coeffs_;
};

double eval_field(const FieldSample& s, const Decomposition& d, std::span<const double> x);
GridValues field_on_grid(const FieldSample& s, const Decomposition& d, int resolution,
                         std::size_t cap = std::size_t{1} << 24);
/// <eta, theta> = sum over atoms of weight * theta(point).
double pair_field(const FieldSample& s, const Decomposition& d, const CoefficientFunctional& eta);

/// Monte-Carlo pairings: row s holds sum_i sqrt(lambda_i) xi_{s,i} table(i, f)
/// where xi_{s,.} comes from stream first_stream + s. Every row is computed by
/// the same loop in both execution modes, so results are identical.
RowMatrix sample_pairings(std::span<const double> lambdas, const Eigen::MatrixXd& table, std::uint64_t seed,
                          std::size_t n_samples, Execution exec = Execution::parallel,
                          std::uint64_t first_stream = 0);

/// Writes `x1[,x2,...],value` rows, one per node, first axis slowest.
/// Several grids are written as consecutive blocks under a single header.
void write_grid_csv(std::ostream& out, const std::vector<GridValues>& grids);

/// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace gfield
