#pragma once

#include <cstdint>
#include <span>

namespace nac {

/// Counter-based generator: the i-th draw of a stream is a pure function of
/// (key, i), so a run's random sequence does not depend on thread scheduling.
/// The mixing function is SplitMix64's finalizer applied to a Weyl sequence.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Inverse-CDF draw of an index from a nonnegative mass array. The masses
  /// need not sum exactly to one; the last index with positive mass absorbs
  /// rounding.
  int sample(std::span<const double> masses);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

/// Derives an independent seed for a labelled sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label);

namespace streams {
inline constexpr std::uint64_t kCriticInit = 1;
inline constexpr std::uint64_t kActorInit = 2;
inline constexpr std::uint64_t kSampling = 3;
inline constexpr std::uint64_t kKernelBlocks = 4;
inline constexpr std::uint64_t kGaussianInit = 5;
}  // namespace streams

}  // namespace nac
