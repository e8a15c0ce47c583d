#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace snlevy {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"), the counter-based generator behind CounterRng.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based stream keyed by (master seed, replicate, substream). The n-th
/// output depends only on those three values and n, so streams can be consumed
/// in any order and on any thread.
///
/// Philox counter layout: {block index, substream lo, substream hi, replicate};
/// the key is the 64-bit master seed.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint32_t replicate, std::uint64_t substream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate) noexcept;
  /// Standard normal (Box-Muller, second variate cached).
  double normal() noexcept;

  /// Number of 128-bit blocks generated so far.
  std::uint32_t blocks() const noexcept { return counter_; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint32_t replicate_;
  std::uint64_t substream_;
  std::uint32_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int next_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finaliser; used to derive substream identifiers.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace snlevy
