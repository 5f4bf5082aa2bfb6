#pragma once

#include <cstdint>

namespace tvdecomp {

/// SplitMix64 used as a counter-based generator.
///
/// Draw i (i = 1, 2, ...) of stream s under seed k is
///   mix64(key + i * 0x9E3779B97F4A7C15),  key = mix64(k ^ mix64(s + 0xD1B54A32D192ED03)),
/// where mix64 is the SplitMix64 finalizer. Only integer arithmetic is involved, so
/// the raw stream is identical on every platform.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0,1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; both outputs of a pair are used.
  double normal();
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix64(std::uint64_t z);

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tvdecomp
