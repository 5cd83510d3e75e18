#include "gfield/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gfield {

namespace {

void check_unit_cube(std::span<const double> x, std::size_t dim) {
  if (x.size() != dim)
    throw std::domain_error("point has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(dim));
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("point outside [0,1]^n");
}

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

}  // namespace

Dyadic Dyadic::make(std::int64_t numerator, int level) {
  if (level < 0) throw std::invalid_argument("dyadic level must be >= 0");
  if (numerator < 0 || numerator > (std::int64_t{1} << level))
    throw std::invalid_argument("dyadic coordinate outside [0,1]");
  while (level > 0 && numerator % 2 == 0) {
    numerator /= 2;
    --level;
  }
  return {numerator, level};
}

double Dyadic::value() const { return std::ldexp(static_cast<double>(numerator), -level); }

std::int64_t Dyadic::numerator_at(int target) const {
  if (target < level) throw std::invalid_argument("target denominator too coarse");
  return numerator << (target - level);
}

DyadicIndex::DyadicIndex(std::vector<Dyadic> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw std::invalid_argument("dyadic index needs dim >= 1");
  for (auto& c : coords_) {
    c = Dyadic::make(c.numerator, c.level);
    level_ = std::max(level_, c.level);
  }
}

DyadicIndex DyadicIndex::from_numerators(std::span<const std::int64_t> numerators,
                                         int denominator_level) {
  std::vector<Dyadic> c;
  c.reserve(numerators.size());
  for (auto p : numerators) c.push_back(Dyadic::make(p, denominator_level));
  return DyadicIndex(std::move(c));
}

std::vector<double> DyadicIndex::point() const {
  std::vector<double> x;
  x.reserve(coords_.size());
  for (const auto& c : coords_) x.push_back(c.value());
  return x;
}

std::vector<std::int64_t> DyadicIndex::numerators() const {
  std::vector<std::int64_t> p;
  p.reserve(coords_.size());
  for (const auto& c : coords_) p.push_back(c.numerator_at(level_));
  return p;
}

std::size_t dyadic_count(int dim, int k_max) {
  if (dim <= 0) throw std::invalid_argument("dim must be >= 1");
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  return static_cast<std::size_t>(ipow((std::int64_t{1} << k_max) + 1, dim));
}

std::vector<DyadicIndex> enumerate_dyadic(int dim, int k_max) {
  const std::size_t total = dyadic_count(dim, k_max);
  std::vector<DyadicIndex> out;
  out.reserve(total);
  std::vector<std::int64_t> p(dim);
  for (int k = 0; k <= k_max; ++k) {
    const std::int64_t top = std::int64_t{1} << k;
    std::fill(p.begin(), p.end(), 0);
    // Odometer over {0..2^k}^dim, first coordinate most significant.
    while (true) {
      bool has_odd = (k == 0);
      for (auto v : p) has_odd = has_odd || (v % 2 != 0);
      if (has_odd) out.push_back(DyadicIndex::from_numerators(p, k));
      int i = dim - 1;
      while (i >= 0 && p[i] == top) p[i--] = 0;
      if (i < 0) break;
      ++p[i];
    }
  }
  return out;
}

double eval_basis(const BasisFunction& b, std::span<const double> x) {
  check_unit_cube(x, b.index.dim());
  const int k = b.index.level();
  double v = std::exp2(-b.alpha * k);
  for (std::size_t i = 0; i < x.size(); ++i)
    v *= eval_mother(std::ldexp(x[i], k) - static_cast<double>(b.index.coords()[i].numerator_at(k)));
  return v;
}

CoefficientFunctional::CoefficientFunctional(std::vector<Atom> atoms) {
  if (atoms.empty()) return;
  const std::size_t d = atoms.front().point.size();
  for (const auto& a : atoms)
    if (a.point.size() != d) throw std::invalid_argument("atoms of mixed dimension");
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.point < b.point; });
  for (auto& a : atoms) {
    if (!atoms_.empty() && atoms_.back().point == a.point)
      atoms_.back().weight += a.weight;
    else
      atoms_.push_back(std::move(a));
  }
  std::erase_if(atoms_, [](const Atom& a) { return a.weight == 0.0; });
}

CoefficientFunctional CoefficientFunctional::dirac(std::vector<double> point, double weight) {
  return CoefficientFunctional({Atom{std::move(point), weight}});
}

double CoefficientFunctional::total_weight() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

CoefficientFunctional CoefficientFunctional::scaled(double s) const {
  std::vector<Atom> a = atoms_;
  for (auto& at : a) at.weight *= s;
  return CoefficientFunctional(std::move(a));
}

CoefficientFunctional operator+(const CoefficientFunctional& a, const CoefficientFunctional& b) {
  std::vector<Atom> all = a.atoms_;
  all.insert(all.end(), b.atoms_.begin(), b.atoms_.end());
  return CoefficientFunctional(std::move(all));
}

CoefficientFunctional coeff_functional(const DyadicIndex& idx, double alpha) {
  const auto tau = idx.point();
  const int k = idx.level();
  if (k == 0) return CoefficientFunctional::dirac(tau);
  const std::size_t n = idx.dim();
  const double w = std::exp2(alpha * k - static_cast<double>(n));
  const double h = std::ldexp(1.0, -k);
  std::vector<Atom> atoms;
  atoms.reserve(2u << n);
  for (std::size_t eps = 0; eps < (std::size_t{1} << n); ++eps) {
    std::vector<double> shifted = tau;
    for (std::size_t i = 0; i < n; ++i) {
      if (idx.coords()[i].level != k) continue;
      shifted[i] += ((eps >> i) & 1u) ? h : -h;
    }
    atoms.push_back({tau, w});
    atoms.push_back({std::move(shifted), -w});
  }
  return CoefficientFunctional(std::move(atoms));
}

std::pair<long, long> square_order(SquareMode mode, long m) {
  if (m <= 0) throw std::invalid_argument("square ordering is 1-based");
  if (mode == SquareMode::full) {
    long r = static_cast<long>(std::sqrt(static_cast<double>(m)));
    while (r * r < m) ++r;
    while ((r - 1) * (r - 1) >= m) --r;
    const long off = m - ((r - 1) * (r - 1) + 1);
    if (off < r) return {r, off + 1};
    return {r - 1 - (off - r), r};
  }
  long r = static_cast<long>((std::sqrt(8.0 * static_cast<double>(m) + 1.0) - 1.0) / 2.0);
  while (r * (r + 1) / 2 < m) ++r;
  while (r > 1 && (r - 1) * r / 2 >= m) --r;
  return {r, m - r * (r - 1) / 2};
}

long square_rank(SquareMode mode, long i, long j) {
  if (i <= 0 || j <= 0) throw std::invalid_argument("square ordering indices are 1-based");
  if (mode == SquareMode::full) {
    const long r = std::max(i, j);
    const long start = (r - 1) * (r - 1) + 1;
    if (i == r) return start + j - 1;
    return start + r + (r - 1 - i);
  }
  if (j > i) throw std::invalid_argument("symmetric square ordering requires j <= i");
  return i * (i - 1) / 2 + j;
}

long SquareOrdering::count() const {
  return mode == SquareMode::full ? size * size : size * (size + 1) / 2;
}

std::vector<std::pair<long, long>> SquareOrdering::pairs() const {
  std::vector<std::pair<long, long>> out;
  out.reserve(static_cast<std::size_t>(count()));
  for (long m = 1; m <= count(); ++m) out.push_back(square_order(mode, m));
  return out;
}

DyadicBasis::DyadicBasis(int dim, int k_max, double alpha)
    : dim_(dim), k_max_(k_max), alpha_(alpha), indices_(enumerate_dyadic(dim, k_max)) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
  for (int k = 0; k <= k_max; ++k) level_scale_.push_back(std::exp2(-alpha * k));
  numerators_.reserve(indices_.size());
  for (const auto& idx : indices_) numerators_.push_back(idx.numerators());
}

std::size_t DyadicBasis::position(std::span<const std::int64_t> p, int k) const {
  const std::size_t n = p.size();
  if (k == 0) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) pos = 2 * pos + static_cast<std::size_t>(p[i]);
    return pos;
  }
  const std::int64_t base = (std::int64_t{1} << k) + 1;
  const std::int64_t evens = (std::int64_t{1} << (k - 1)) + 1;
  std::int64_t lex = 0;
  for (std::size_t i = 0; i < n; ++i) lex = lex * base + p[i];
  // Subtract the all-even tuples that precede p lexicographically.
  std::int64_t even_before = 0;
  for (std::size_t i = 0; i < n; ++i) {
    even_before += ((p[i] + 1) / 2) * ipow(evens, static_cast<int>(n - 1 - i));
    if (p[i] % 2 != 0) break;
  }
  const std::int64_t offset = ipow(evens, static_cast<int>(n));
  return static_cast<std::size_t>(offset + lex - even_before);
}

std::optional<std::size_t> DyadicBasis::position(const DyadicIndex& idx) const {
  if (static_cast<int>(idx.dim()) != dim_ || idx.level() > k_max_) return std::nullopt;
  const auto p = idx.numerators();
  return position(p, idx.level());
}

double DyadicBasis::eval(std::size_t p, std::span<const double> x) const {
  check_unit_cube(x, static_cast<std::size_t>(dim_));
  const int k = indices_[p].level();
  double v = level_scale_[k];
  for (int i = 0; i < dim_; ++i)
    v *= eval_mother(std::ldexp(x[i], k) - static_cast<double>(numerators_[p][i]));
  return v;
}

CoefficientFunctional DyadicBasis::functional(std::size_t p) const {
  return coeff_functional(indices_[p], alpha_);
}

void DyadicBasis::supported(std::span<const double> x,
                            std::vector<std::pair<std::size_t, double>>& out) const {
  check_unit_cube(x, static_cast<std::size_t>(dim_));
  out.clear();
  std::vector<std::int64_t> lo(dim_), p(dim_);
  std::vector<double> t(dim_);
  for (int k = 0; k <= k_max_; ++k) {
    const std::int64_t top = std::int64_t{1} << k;
    for (int i = 0; i < dim_; ++i) {
      t[i] = std::ldexp(x[i], k);
      lo[i] = std::min(static_cast<std::int64_t>(std::floor(t[i])), top - 1);
      if (k == 0) lo[i] = 0;
    }
    // Corners of the level-k cell containing x, lexicographic order.
    for (std::size_t mask = 0; mask < (std::size_t{1} << dim_); ++mask) {
      bool has_odd = (k == 0);
      double v = level_scale_[k];
      for (int i = 0; i < dim_; ++i) {
        p[i] = lo[i] + static_cast<std::int64_t>((mask >> (dim_ - 1 - i)) & 1u);
        has_odd = has_odd || (p[i] % 2 != 0);
        v *= eval_mother(t[i] - static_cast<double>(p[i]));
      }
      if (!has_odd || v == 0.0) continue;
      out.emplace_back(position(p, k), v);
    }
  }
}

double DyadicBasis::synthesize(std::span<const double> coeffs, std::span<const double> x) const {
  if (coeffs.size() != indices_.size()) throw std::invalid_argument("coefficient length mismatch");
  thread_local std::vector<std::pair<std::size_t, double>> terms;
  supported(x, terms);
  double acc = 0.0;
  for (const auto& [p, v] : terms) acc += coeffs[p] * v;
  return acc;
}

}  // namespace gfield
