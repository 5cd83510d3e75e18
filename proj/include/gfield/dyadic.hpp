#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace gfield {

/// Dyadic rational p / 2^level in lowest terms (odd p, or level 0).
struct Dyadic {
  std::int64_t numerator = 0;
  int level = 0;

  static Dyadic make(std::int64_t numerator, int level);
  double value() const;
  /// Numerator of this value at the common denominator 2^target (target >= level).
  std::int64_t numerator_at(int target) const;

  friend bool operator==(const Dyadic&, const Dyadic&) = default;
};

/// Multi-index tau in D^n_k. The level k is the highest resolution among the
/// coordinates; coordinates are kept exact.
class DyadicIndex {
 public:
  DyadicIndex() = default;
  explicit DyadicIndex(std::vector<Dyadic> coords);

  /// Build from numerators at the common denominator 2^denominator_level.
  static DyadicIndex from_numerators(std::span<const std::int64_t> numerators,
                                     int denominator_level);

  std::size_t dim() const { return coords_.size(); }
  int level() const { return level_; }
  const std::vector<Dyadic>& coords() const { return coords_; }
  std::vector<double> point() const;
  /// Numerators at denominator 2^level().
  std::vector<std::int64_t> numerators() const;

  friend bool operator==(const DyadicIndex& a, const DyadicIndex& b) {
    return a.coords_ == b.coords_;
  }

 private:
  std::vector<Dyadic> coords_;
  int level_ = 0;
};

/// All indices of D^n_0 u ... u D^n_{k_max}, ordered by level, then
/// lexicographically by numerators at denominator 2^level.
std::vector<DyadicIndex> enumerate_dyadic(int dim, int k_max);

/// Number of indices up to and including level k_max: (2^k_max + 1)^dim.
std::size_t dyadic_count(int dim, int k_max);

/// Hat function 1 - |t| on [-1, 1], zero elsewhere.
inline double eval_mother(double t) {
  const double a = t < 0 ? -t : t;
  return a < 1.0 ? 1.0 - a : 0.0;
}

/// Faber-Schauder function scaled by 2^{-alpha k}. alpha = 0 gives the plain
/// sup-normalised hat (the C(Omega) system); alpha in (0, 1] the Hoelder one.
struct BasisFunction {
  DyadicIndex index;
  double alpha = 1.0;
};

/// Throws std::domain_error when x is outside [0,1]^n or has the wrong size.
double eval_basis(const BasisFunction& b, std::span<const double> x);

struct Atom {
  std::vector<double> point;
  double weight = 0.0;
};

/// Finite signed combination of Dirac masses. Atoms are sorted by point,
/// duplicates merged and zero weights dropped on construction.
class CoefficientFunctional {
 public:
  CoefficientFunctional() = default;
  explicit CoefficientFunctional(std::vector<Atom> atoms);

  static CoefficientFunctional dirac(std::vector<double> point, double weight = 1.0);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t dim() const { return atoms_.empty() ? 0 : atoms_.front().point.size(); }
  double total_weight() const;

  CoefficientFunctional scaled(double s) const;
  friend CoefficientFunctional operator+(const CoefficientFunctional& a,
                                         const CoefficientFunctional& b);

 private:
  std::vector<Atom> atoms_;
};

/// Coefficient functional dual to the alpha-renormalised basis function at idx.
CoefficientFunctional coeff_functional(const DyadicIndex& idx, double alpha);

/// Sum of weight * f(point) over the atoms, in atom order.
template <class F>
double apply_functional(const CoefficientFunctional& phi, F&& f) {
  double acc = 0.0;
  for (const auto& a : phi.atoms()) acc += a.weight * f(std::span<const double>(a.point));
  return acc;
}

enum class SquareMode { full, symmetric };

/// m-th pair (1-based) of the square ordering.
std::pair<long, long> square_order(SquareMode mode, long m);
/// Inverse of square_order.
long square_rank(SquareMode mode, long i, long j);

struct SquareOrdering {
  SquareMode mode = SquareMode::symmetric;
  long size = 0;

  long count() const;
  std::vector<std::pair<long, long>> pairs() const;
};

/// The finite Faber-Schauder system up to level k_max on [0,1]^dim, with
/// constant-time index lookup and sparse synthesis.
class DyadicBasis {
 public:
  DyadicBasis(int dim, int k_max, double alpha);

  int dim() const { return dim_; }
  int k_max() const { return k_max_; }
  double alpha() const { return alpha_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<DyadicIndex>& indices() const { return indices_; }
  const DyadicIndex& index(std::size_t p) const { return indices_[p]; }
  int level(std::size_t p) const { return indices_[p].level(); }

  std::optional<std::size_t> position(const DyadicIndex& idx) const;
  /// Position of the level-k index with the given numerators at denominator 2^k.
  std::size_t position(std::span<const std::int64_t> numerators, int k) const;

  double eval(std::size_t p, std::span<const double> x) const;
  CoefficientFunctional functional(std::size_t p) const;

  /// Basis functions whose support contains x, as (position, value), in
  /// increasing position order.
  void supported(std::span<const double> x,
                 std::vector<std::pair<std::size_t, double>>& out) const;

  /// sum_p coeffs[p] * f_p(x), accumulated in increasing position order.
  double synthesize(std::span<const double> coeffs, std::span<const double> x) const;

 private:
  int dim_;
  int k_max_;
  double alpha_;
  std::vector<DyadicIndex> indices_;
  std::vector<double> level_scale_;
  std::vector<std::vector<std::int64_t>> numerators_;
};

}  // namespace gfield
