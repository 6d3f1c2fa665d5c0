#pragma once

#include <cstdint>

namespace seqdisc {

/// Counter-based deterministic generator built on the splitmix64 finalizer.
/// Output i of stream `stream` under seed `seed` is
///
///   key    = mix(mix(seed + GAMMA) ^ (stream * 0xD2B74407B1CE6E93))
///   out_i  = mix(key + (i + 1) * GAMMA)
///
/// with GAMMA = 0x9E3779B97F4A7C15 and mix the splitmix64 finalizer.  Pure
/// 64-bit integer arithmetic, so sequences are identical on every platform,
/// and any (seed, stream, i) value can be computed without generating the
/// preceding ones.  Simulations use one stream per trial, which makes trial
/// results independent of execution order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed + kGamma) ^ (stream * 0xD2B74407B1CE6E93ull))) {}

  std::uint64_t next_u64() { return at_key(key_, counter_++); }

  /// Uniform double in [0, 1), 53 random mantissa bits.
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  static std::uint64_t at(std::uint64_t seed, std::uint64_t stream, std::uint64_t i) {
    CounterRng r(seed, stream);
    return at_key(r.key_, i);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  static std::uint64_t at_key(std::uint64_t key, std::uint64_t i) {
    return mix(key + (i + 1) * kGamma);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace seqdisc
