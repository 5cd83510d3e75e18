#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gfield {

/// Selects the serial reference loop or the OpenMP kernel. Both produce
/// identical results; the serial path exists for testing and benchmarking.
enum class Execution { serial, parallel };

/// Values on the uniform dyadic grid of 2^resolution + 1 nodes per axis,
/// row-major with the first axis slowest.
struct GridValues {
  int dim = 1;
  int resolution = 0;
  std::vector<double> values;

  std::size_t points_per_axis() const { return (std::size_t{1} << resolution) + 1; }
  std::size_t size() const;
  /// Coordinates of node `linear`.
  std::vector<double> node(std::size_t linear) const;
};

/// Throws std::length_error when (2^resolution + 1)^dim exceeds cap.
std::size_t grid_size(int dim, int resolution, std::size_t cap);

/// Max |f(x) - f(x')| / |x - x'|^gamma over grid node pairs.
/// dim 1: all pairs. dim >= 2: all pairs within Chebyshev radius 4 cells plus
/// all axis-aligned pairs.
/// The parallel path prunes lags whose bound (max f - min f) / lag^gamma can
/// no longer beat the running maximum; the serial path visits every pair.
double holder_seminorm(const GridValues& grid, double gamma, Execution exec = Execution::parallel);

double sup_norm(const GridValues& grid);

}  // namespace gfield
