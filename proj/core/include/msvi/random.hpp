#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace msvi {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by a 64-bit seed (the Philox key) and a 64-bit
/// stream index (the upper half of the counter). Equal (seed, stream) pairs
/// reproduce the same sequence; distinct stream indices never share a counter
/// block. Satisfies UniformRandomBitGenerator with 64-bit output.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  /// Stream whose index is a hash of a key path, e.g.
  /// `RandomStream::derive(seed, {replication, iteration, observation})`.
  static RandomStream derive(std::uint64_t seed,
                             std::initializer_list<std::uint64_t> path) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Standard normal by inversion.
  double normal() noexcept;
  /// Standard exponential.
  double exponential() noexcept;
  /// Uniform integer in [0, n), n > 0 (rejection, unbiased).
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

namespace detail {
/// One Philox4x32 block with 10 rounds (Salmon et al. 2011).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;
}  // namespace detail

/// SplitMix64 finalizer, used to mix key paths into stream indices.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace msvi
