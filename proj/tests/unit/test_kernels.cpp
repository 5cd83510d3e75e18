#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <random>

#include "gfield/dyadic.hpp"
#include "gfield/kernels.hpp"

using namespace gfield;

namespace {

double eval1(const KernelSpec& k, double x, double y) {
  return eval_kernel(k, std::vector<double>{x}, std::vector<double>{y});
}

}  // namespace

TEST(Kernels, ExpAlphaValues) {
  const KernelSpec k = parse_kernel("exp-alpha:0.5", 1);
  EXPECT_DOUBLE_EQ(eval1(k, 0.3, 0.3), 1.0);
  EXPECT_NEAR(eval1(k, 0.0, 1.0), std::exp(-0.5), 1e-15);
  const KernelSpec q = parse_kernel("exp-alpha:0.25", 1);
  EXPECT_NEAR(eval1(q, 0.0, 1.0 / 16.0), std::exp(-0.125), 1e-15);
}

TEST(Kernels, GaussianValues) {
  const KernelSpec k = parse_kernel("gaussian-se:2", 2);
  const std::vector<double> x = {0.1, 0.2}, y = {0.7, 0.9};
  const double r2 = 0.36 + 0.49;
  EXPECT_NEAR(eval_kernel(k, x, y), std::exp(-r2 / 8.0), 1e-15);
}

TEST(Kernels, SymmetryIsExact) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const char* s : {"exp-alpha:0.3", "exp-alpha:0.8", "gaussian-se:0.5"}) {
    const KernelSpec k = parse_kernel(s, 2);
    for (int t = 0; t < 200; ++t) {
      const std::vector<double> x = {u(gen), u(gen)}, y = {u(gen), u(gen)};
      EXPECT_EQ(eval_kernel(k, x, y), eval_kernel(k, y, x));
    }
  }
}

TEST(Kernels, WhiteNoiseHasNoPointValues) {
  const KernelSpec k = parse_kernel("white-noise:lebesgue", 1);
  EXPECT_FALSE(k.pointwise());
  try {
    eval1(k, 0.1, 0.2);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "kernel is measure-valued; use pairing operations");
  }
}

TEST(Kernels, ParseRoundTripAndErrors) {
  for (const char* s : {"exp-alpha:0.5", "gaussian-se:1", "white-noise:lebesgue"})
    EXPECT_EQ(parse_kernel(parse_kernel(s, 1).to_string(), 1).to_string(), parse_kernel(s, 1).to_string());
  EXPECT_THROW(parse_kernel("exp-alpha:1.5", 1), std::invalid_argument);
  EXPECT_THROW(parse_kernel("exp-alpha:abc", 1), std::invalid_argument);
  EXPECT_THROW(parse_kernel("matern:1", 1), std::invalid_argument);
  EXPECT_THROW(parse_kernel("gaussian-se:0", 1), std::invalid_argument);
  EXPECT_THROW(parse_kernel("white-noise:density:affine:-1,0.5", 1), std::invalid_argument);
  const KernelSpec c = parse_kernel("white-noise:counting:0;1", 1);
  EXPECT_EQ(std::get<Counting>(std::get<WhiteNoise>(c.family).base.kind).points.size(), 2u);
}

TEST(Kernels, GridKernelInterpolatesAndMustBeSymmetric) {
  const std::string path = ::testing::TempDir() + "/grid_kernel.csv";
  {
    std::ofstream f(path);
    f << "1,0.5\n0.5,1\n";
  }
  const KernelSpec k = parse_kernel("grid-kernel:" + path, 1);
  EXPECT_NEAR(eval1(k, 0.0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(eval1(k, 0.5, 0.5), 0.75, 1e-15);
  {
    std::ofstream f(path);
    f << "1,0.4\n0.5,1\n";
  }
  EXPECT_THROW(parse_kernel("grid-kernel:" + path, 1), std::invalid_argument);
}

TEST(Kernels, PairingExamples) {
  const KernelSpec k = parse_kernel("exp-alpha:0.5", 1);
  const auto d0 = CoefficientFunctional::dirac({0.0});
  const auto d1 = CoefficientFunctional::dirac({1.0});
  EXPECT_DOUBLE_EQ(kernel_pairing(k, d0, d0), 1.0);
  EXPECT_NEAR(kernel_pairing(k, d0, d1), std::exp(-0.5), 1e-15);
}

TEST(Kernels, PairingOfSecondDifferencesMatchesBruteForce) {
  // mu_{1/2} = 2^{-1/2} (2 d_{1/2} - d_0 - d_1) at alpha = 1/2.
  const KernelSpec k = parse_kernel("exp-alpha:0.5", 1);
  const auto mu = coeff_functional(DyadicIndex({Dyadic::make(1, 1)}), 0.5);
  const double pts[3] = {0.0, 0.5, 1.0};
  const double w[3] = {-std::sqrt(0.5), 2.0 * std::sqrt(0.5), -std::sqrt(0.5)};
  double brute = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) brute += w[i] * w[j] * std::exp(-0.5 * std::abs(pts[i] - pts[j]));
  EXPECT_NEAR(kernel_pairing(k, mu, mu), brute, 1e-14);
  // Independent route: the same double second difference of the closed form.
  const double e = std::exp(-0.25), f = std::exp(-0.5);
  EXPECT_NEAR(brute, 0.5 * (4.0 - 8.0 * e + 2.0 + 2.0 * f), 1e-14);
}

TEST(Kernels, PairingIsBilinear) {
  const KernelSpec k = parse_kernel("gaussian-se:1", 1);
  const auto a = CoefficientFunctional({{{0.1}, 1.5}, {{0.6}, -0.5}});
  const auto b = CoefficientFunctional({{{0.3}, 2.0}});
  const auto c = CoefficientFunctional({{{0.9}, -1.0}, {{0.2}, 0.25}});
  EXPECT_NEAR(kernel_pairing(k, a + b.scaled(3.0), c), kernel_pairing(k, a, c) + 3.0 * kernel_pairing(k, b, c), 1e-14);
  EXPECT_NEAR(kernel_pairing(k, a, c), kernel_pairing(k, c, a), 1e-15);
}

TEST(Kernels, GramMatrixIsPositiveSemidefinite) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const char* s : {"exp-alpha:0.2", "exp-alpha:0.5", "exp-alpha:0.9"}) {
    const KernelSpec k = parse_kernel(s, 2);
    const int n = 60;
    std::vector<std::vector<double>> pts(n);
    for (auto& p : pts) p = {u(gen), u(gen)};
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = eval_kernel(k, pts[i], pts[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * es.eigenvalues().cwiseAbs().maxCoeff()) << s;
  }
}

TEST(Kernels, L2PairingExamples) {
  const BaseMeasure leb{Lebesgue{}};
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  const PointFunction x = [](std::span<const double> p) { return p[0]; };
  EXPECT_NEAR(l2_pairing(leb, 1, one, one), 1.0, 1e-14);
  EXPECT_NEAR(l2_pairing(leb, 1, x, one), 0.5, 1e-14);
  EXPECT_NEAR(l2_pairing(leb, 1, x, x), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(total_mass(leb, 2), 1.0, 1e-12);
}

TEST(Kernels, L2PairingDensityAndCounting) {
  const BaseMeasure dens = std::get<WhiteNoise>(parse_kernel("white-noise:density:affine:1,2", 1).family).base;
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  EXPECT_NEAR(total_mass(dens, 1), 2.0, 1e-12);
  const BaseMeasure cnt{Counting{{{0.0}, {0.5}, {1.0}}}};
  const PointFunction x = [](std::span<const double> p) { return p[0]; };
  EXPECT_NEAR(l2_pairing(cnt, 1, x, x), 1.25, 1e-15);
  const BaseMeasure neg{Density{[](std::span<const double> p) { return p[0] - 0.5; }, "bad"}};
  EXPECT_THROW(l2_pairing(neg, 1, one, one), std::invalid_argument);
}

TEST(Kernels, HatProductClosedFormMatchesQuadrature) {
  const auto idx = enumerate_dyadic(1, 3);
  const BaseMeasure leb{Lebesgue{}};
  for (const auto& a : idx)
    for (const auto& b : idx) {
      const BasisFunction fa{a, 0.0}, fb{b, 0.0};
      const PointFunction f = [&](std::span<const double> x) { return eval_basis(fa, x); };
      const PointFunction g = [&](std::span<const double> x) { return eval_basis(fb, x); };
      EXPECT_NEAR(hat_product_integral(a, b), l2_pairing(leb, 1, f, g, {256}), 1e-10);
    }
  const DyadicIndex z({Dyadic::make(0, 0)}), o({Dyadic::make(1, 0)});
  EXPECT_NEAR(hat_product_integral(z, z), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(hat_product_integral(z, o), 1.0 / 6.0, 1e-15);
}
