#pragma once

#include <cstdint>
#include <limits>

namespace ghostconv {

/// Identifies one realization of the source ensemble.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t realization_index = 0;
};

/// Counter-based generator: output j of a stream is the SplitMix64 finalizer
/// applied to key + (j + 1) * golden, with the key itself a hash of
/// (seed, realization_index). Any realization can be generated without
/// touching the others, which keeps parallel runs order-free.
///
/// Satisfies std::uniform_random_bit_generator.
class CounterRng {
public:
  using result_type = std::uint64_t;

  explicit CounterRng(RngStream stream) noexcept
      : key_(mix(stream.seed ^ mix(stream.realization_index + 0x6a09e667f3bcc909ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    counter_ += kGolden;
    return mix(key_ + counter_);
  }

  /// Uniform on (0, 1], 53 random bits.
  double uniform_open_closed() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

} // namespace ghostconv
