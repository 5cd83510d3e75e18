#pragma once

#include <array>
#include <cstdint>

namespace gfield {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Stateless: every output block is a pure function of (key, counter).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Inverse of the standard normal CDF (Wichura, AS 241 PPND16; relative
/// accuracy about 1e-16). p must lie in (0, 1).
double normal_quantile(double p);

/// Standard normal variates for one (seed, stream) pair. Variate i comes from
/// Philox block floor(i / 2) with counter (stream_lo, stream_hi, block_lo,
/// block_hi); each variate uses 53 bits from two 32-bit words mapped to the
/// open interval (0, 1) and then through normal_quantile.
class NormalStream {
 public:
  static constexpr const char* kAlgorithm = "philox4x32-10";
  static constexpr const char* kNormalMethod = "inverse-cdf-as241";

  NormalStream(std::uint64_t seed, std::uint64_t stream);

  /// Variate at position i (random access, no internal state).
  double at(std::uint64_t i) const;
  /// Uniform in (0, 1) at position i.
  double uniform(std::uint64_t i) const;

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
};

}  // namespace gfield
