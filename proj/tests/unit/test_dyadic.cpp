#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gfield/dyadic.hpp"

using namespace gfield;

namespace {

std::vector<double> values_1d(const std::vector<DyadicIndex>& idx) {
  std::vector<double> v;
  for (const auto& i : idx) v.push_back(i.point()[0]);
  return v;
}

}  // namespace

TEST(Dyadic, MakeReducesToLowestTerms) {
  const Dyadic d = Dyadic::make(4, 3);
  EXPECT_EQ(d.numerator, 1);
  EXPECT_EQ(d.level, 1);
  EXPECT_EQ(Dyadic::make(0, 5).level, 0);
  EXPECT_EQ(Dyadic::make(8, 3).numerator, 1);
  EXPECT_EQ(Dyadic::make(8, 3).level, 0);
  EXPECT_EQ(Dyadic::make(3, 2).numerator_at(4), 12);
}

TEST(Dyadic, EnumerateLevelZero) {
  EXPECT_EQ(values_1d(enumerate_dyadic(1, 0)), (std::vector<double>{0.0, 1.0}));
}

TEST(Dyadic, EnumerateTwoLevels) {
  EXPECT_EQ(values_1d(enumerate_dyadic(1, 2)), (std::vector<double>{0.0, 1.0, 0.5, 0.25, 0.75}));
}

TEST(Dyadic, EnumerateTwoDimensions) {
  const auto idx = enumerate_dyadic(2, 1);
  ASSERT_EQ(idx.size(), 9u);
  int level0 = 0;
  for (const auto& i : idx) {
    if (i.level() == 0) {
      ++level0;
      for (double c : i.point()) EXPECT_TRUE(c == 0.0 || c == 1.0);
    } else {
      const auto p = i.point();
      EXPECT_TRUE(p[0] == 0.5 || p[1] == 0.5);
    }
  }
  EXPECT_EQ(level0, 4);
}

TEST(Dyadic, CountMatchesEnumeration) {
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= 3; ++k) EXPECT_EQ(enumerate_dyadic(n, k).size(), dyadic_count(n, k));
  EXPECT_EQ(dyadic_count(1, 6), 65u);
}

TEST(Dyadic, EnumerateRejectsBadArguments) {
  EXPECT_THROW(enumerate_dyadic(0, 1), std::invalid_argument);
  EXPECT_THROW(enumerate_dyadic(1, -1), std::invalid_argument);
}

TEST(Dyadic, MotherWavelet) {
  EXPECT_DOUBLE_EQ(eval_mother(0.0), 1.0);
  EXPECT_DOUBLE_EQ(eval_mother(-0.5), 0.5);
  EXPECT_DOUBLE_EQ(eval_mother(2.0), 0.0);
}

TEST(Dyadic, EvalBasisExamples) {
  const BasisFunction half{DyadicIndex({Dyadic::make(1, 1)}), 0.5};
  EXPECT_NEAR(eval_basis(half, std::vector<double>{0.5}), std::pow(2.0, -0.5), 1e-15);
  EXPECT_NEAR(eval_basis(half, std::vector<double>{0.25}), 0.5 * std::pow(2.0, -0.5), 1e-15);
  const BasisFunction zero{DyadicIndex({Dyadic::make(0, 0)}), 0.3};
  EXPECT_DOUBLE_EQ(eval_basis(zero, std::vector<double>{1.0}), 0.0);
  EXPECT_THROW(eval_basis(zero, std::vector<double>{1.5}), std::domain_error);
}

TEST(Dyadic, SupportLocality) {
  const DyadicBasis basis(2, 3, 0.5);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t p = 0; p < basis.size(); ++p) {
    const auto tau = basis.index(p).point();
    const double half = std::ldexp(1.0, -basis.level(p));
    for (int t = 0; t < 20; ++t) {
      const std::vector<double> x = {u(gen), u(gen)};
      if (std::abs(x[0] - tau[0]) >= half || std::abs(x[1] - tau[1]) >= half)
        EXPECT_EQ(basis.eval(p, x), 0.0);
    }
  }
}

TEST(Dyadic, CoefficientFunctionalExamples) {
  const auto f0 = coeff_functional(DyadicIndex({Dyadic::make(0, 0)}), 0.5);
  ASSERT_EQ(f0.atoms().size(), 1u);
  EXPECT_EQ(f0.atoms()[0].point, std::vector<double>{0.0});
  EXPECT_EQ(f0.atoms()[0].weight, 1.0);

  const double alpha = 0.7;
  const auto fh = coeff_functional(DyadicIndex({Dyadic::make(1, 1)}), alpha);
  ASSERT_EQ(fh.atoms().size(), 3u);
  const double s = std::pow(2.0, alpha - 1.0);
  EXPECT_NEAR(fh.atoms()[0].weight, -s, 1e-15);
  EXPECT_NEAR(fh.atoms()[1].weight, 2.0 * s, 1e-15);
  EXPECT_NEAR(fh.atoms()[2].weight, -s, 1e-15);
  EXPECT_NEAR(fh.total_weight(), 0.0, 1e-15);
}

TEST(Dyadic, ApplyFunctionalExamples) {
  const auto mu = coeff_functional(DyadicIndex({Dyadic::make(1, 1)}), 0.5);
  EXPECT_NEAR(apply_functional(mu, [](std::span<const double> x) { return x[0]; }), 0.0, 1e-15);
  EXPECT_NEAR(apply_functional(mu, [](std::span<const double> x) { return x[0] * x[0]; }), -std::pow(2.0, -1.5), 1e-15);
  const BasisFunction f{DyadicIndex({Dyadic::make(1, 1)}), 0.5};
  EXPECT_NEAR(apply_functional(mu, [&](std::span<const double> x) { return eval_basis(f, x); }), 1.0, 1e-15);
  const auto d0 = CoefficientFunctional::dirac({0.0});
  EXPECT_EQ(apply_functional(d0, [](std::span<const double>) { return 1.0; }), 1.0);
}

TEST(Dyadic, LevelKFunctionalsHaveZeroTotalWeight) {
  for (const auto& idx : enumerate_dyadic(2, 3))
    if (idx.level() > 0) EXPECT_NEAR(coeff_functional(idx, 0.4).total_weight(), 0.0, 1e-13);
}

TEST(Dyadic, FunctionalMergesDuplicatesAndDropsZeros) {
  CoefficientFunctional f({{{0.5}, 1.0}, {{0.25}, 2.0}, {{0.5}, -1.0}});
  ASSERT_EQ(f.atoms().size(), 1u);
  EXPECT_EQ(f.atoms()[0].point, std::vector<double>{0.25});
  const auto g = f + CoefficientFunctional::dirac({0.25}, -2.0);
  EXPECT_TRUE(g.atoms().empty());
}

TEST(Dyadic, BiorthogonalityOneDimension) {
  const DyadicBasis basis(1, 6, 0.5);
  double worst = 0.0;
  for (std::size_t p = 0; p < basis.size(); ++p) {
    const auto mu = basis.functional(p);
    for (std::size_t q = 0; q < basis.size(); ++q) {
      const double v = apply_functional(mu, [&](std::span<const double> x) { return basis.eval(q, x); });
      worst = std::max(worst, std::abs(v - (p == q ? 1.0 : 0.0)));
    }
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Dyadic, BiorthogonalityTwoDimensions) {
  const DyadicBasis basis(2, 2, 0.3);
  for (std::size_t p = 0; p < basis.size(); ++p) {
    const auto mu = basis.functional(p);
    for (std::size_t q = 0; q < basis.size(); ++q) {
      const double v = apply_functional(mu, [&](std::span<const double> x) { return basis.eval(q, x); });
      EXPECT_NEAR(v, p == q ? 1.0 : 0.0, 1e-12) << p << "," << q;
    }
  }
}

TEST(Dyadic, LevelZeroPartitionOfUnity) {
  for (int n = 1; n <= 3; ++n) {
    const DyadicBasis basis(n, 0, 0.5);
    std::mt19937_64 gen(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> x(static_cast<std::size_t>(n));
      for (double& c : x) c = u(gen);
      double s = 0.0;
      for (std::size_t p = 0; p < basis.size(); ++p) s += basis.eval(p, x);
      EXPECT_NEAR(s, 1.0, 1e-14);
    }
  }
}

TEST(Dyadic, UniformReconstructionImproves) {
  // Partial sums of f = exp(-|x - y0| / 2) in the system up to level K.
  const double y0 = 0.37;
  auto f = [&](std::span<const double> x) { return std::exp(-0.5 * std::abs(x[0] - y0)); };
  const DyadicBasis full(1, 9, 0.5);
  std::vector<double> coeffs(full.size());
  for (std::size_t p = 0; p < full.size(); ++p) coeffs[p] = apply_functional(full.functional(p), f);
  std::vector<double> errors;
  for (int k = 0; k <= 9; ++k) {
    std::vector<double> c = coeffs;
    for (std::size_t p = 0; p < full.size(); ++p)
      if (full.level(p) > k) c[p] = 0.0;
    double err = 0.0;
    for (int i = 0; i <= 2048; ++i) {
      const std::vector<double> x = {i / 2048.0};
      err = std::max(err, std::abs(full.synthesize(c, x) - f(x)));
    }
    errors.push_back(err);
  }
  for (std::size_t k = 2; k < errors.size(); ++k) EXPECT_LE(errors[k], errors[k - 1] * (1.0 + 1e-12));
  EXPECT_LT(errors.back(), 1e-3);
}

TEST(Dyadic, SquareOrderingExamples) {
  const std::vector<std::pair<long, long>> sym = {{1, 1}, {2, 1}, {2, 2}, {3, 1}, {3, 2}, {3, 3}};
  for (long m = 1; m <= 6; ++m) EXPECT_EQ(square_order(SquareMode::symmetric, m), sym[m - 1]);
  const std::vector<std::pair<long, long>> full = {{1, 1}, {2, 1}, {2, 2}, {1, 2}};
  for (long m = 1; m <= 4; ++m) EXPECT_EQ(square_order(SquareMode::full, m), full[m - 1]);
  // Row r starts at r(r-1)/2 + 1, so (4,2) sits at 6 + 2.
  EXPECT_EQ(square_rank(SquareMode::symmetric, 4, 2), 8);
}

TEST(Dyadic, SquareOrderingIsBijective) {
  for (auto mode : {SquareMode::full, SquareMode::symmetric}) {
    for (long m = 1; m <= 500; ++m) {
      const auto [i, j] = square_order(mode, m);
      EXPECT_EQ(square_rank(mode, i, j), m);
    }
  }
  const SquareOrdering ord{SquareMode::full, 5};
  EXPECT_EQ(ord.count(), 25);
  auto pairs = ord.pairs();
  std::sort(pairs.begin(), pairs.end());
  EXPECT_EQ(std::unique(pairs.begin(), pairs.end()), pairs.end());
  EXPECT_EQ(SquareOrdering({SquareMode::symmetric, 5}).count(), 15);
}

TEST(Dyadic, SquareOrderingRejectsBadInput) {
  EXPECT_THROW(square_order(SquareMode::full, 0), std::invalid_argument);
  EXPECT_THROW(square_rank(SquareMode::symmetric, 2, 3), std::invalid_argument);
}

TEST(Dyadic, PositionLookupMatchesEnumeration) {
  const DyadicBasis basis(2, 3, 0.5);
  for (std::size_t p = 0; p < basis.size(); ++p) {
    const auto pos = basis.position(basis.index(p));
    ASSERT_TRUE(pos.has_value());
    EXPECT_EQ(*pos, p);
  }
}

TEST(Dyadic, SynthesizeMatchesDirectSum) {
  const DyadicBasis basis(2, 3, 0.4);
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(basis.size());
  for (double& v : c) v = n01(gen);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> x = {u(gen), u(gen)};
    double direct = 0.0;
    for (std::size_t p = 0; p < basis.size(); ++p) direct += c[p] * basis.eval(p, x);
    EXPECT_NEAR(basis.synthesize(c, x), direct, 1e-12);
  }
}
