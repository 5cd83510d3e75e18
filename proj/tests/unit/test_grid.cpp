#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gfield/grid.hpp"

using namespace gfield;

namespace {

GridValues make_grid(int dim, int res, const std::function<double(const std::vector<double>&)>& f) {
  GridValues g;
  g.dim = dim;
  g.resolution = res;
  g.values.resize(grid_size(dim, res, 1u << 22));
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = f(g.node(i));
  return g;
}

// Every pair, no pruning: the brute-force oracle for the 1D seminorm.
double all_pairs(const GridValues& g, double gamma) {
  double best = 0.0;
  const std::size_t n = g.values.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      best = std::max(best, std::abs(g.values[j] - g.values[i]) / std::pow((j - i) * h, gamma));
  return best;
}

}  // namespace

TEST(Grid, SizeAndNodes) {
  EXPECT_EQ(grid_size(1, 0, 10), 2u);
  EXPECT_EQ(grid_size(2, 2, 100), 25u);
  EXPECT_THROW(grid_size(2, 10, 1000), std::length_error);
  GridValues g;
  g.dim = 2;
  g.resolution = 1;
  EXPECT_EQ(g.node(5), (std::vector<double>{0.5, 1.0}));
}

TEST(Grid, SeminormExamples) {
  const auto flat = make_grid(1, 5, [](const auto&) { return 3.0; });
  EXPECT_EQ(holder_seminorm(flat, 0.5), 0.0);
  const auto lin = make_grid(1, 6, [](const auto& x) { return x[0]; });
  EXPECT_NEAR(holder_seminorm(lin, 1.0), 1.0, 1e-14);
  EXPECT_NEAR(holder_seminorm(lin, 0.5), 1.0, 1e-14);
  EXPECT_NEAR(sup_norm(lin), 1.0, 0.0);
}

TEST(Grid, SeminormRejectsBadInput) {
  GridValues empty;
  EXPECT_THROW(holder_seminorm(empty, 0.5), std::invalid_argument);
  const auto lin = make_grid(1, 3, [](const auto& x) { return x[0]; });
  EXPECT_THROW(holder_seminorm(lin, 0.0), std::invalid_argument);
}

TEST(Grid, ParallelMatchesSerialAndBruteForce) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 5; ++t) {
    GridValues g = make_grid(1, 9, [](const auto&) { return 0.0; });
    double acc = 0.0;
    for (double& v : g.values) v = (acc += n01(gen) * 0.05);
    for (double gamma : {0.2, 0.5, 0.9}) {
      const double s = holder_seminorm(g, gamma, Execution::serial);
      EXPECT_EQ(s, holder_seminorm(g, gamma, Execution::parallel));
      EXPECT_EQ(s, all_pairs(g, gamma));
    }
  }
}

TEST(Grid, ParallelMatchesSerialTwoDimensions) {
  std::mt19937_64 gen(19);
  std::normal_distribution<double> n01;
  GridValues g = make_grid(2, 5, [](const auto&) { return 0.0; });
  for (double& v : g.values) v = n01(gen);
  for (double gamma : {0.3, 0.7, 1.0})
    EXPECT_EQ(holder_seminorm(g, gamma, Execution::serial), holder_seminorm(g, gamma, Execution::parallel));
}

TEST(Grid, TwoDimensionalLinearFunction) {
  // |<(1,2), d>| / |d| peaks along (1,2), which lies inside the stencil.
  const auto g = make_grid(2, 4, [](const auto& x) { return x[0] + 2.0 * x[1]; });
  const double s = holder_seminorm(g, 1.0);
  EXPECT_NEAR(s, std::sqrt(5.0), 1e-12);
}
