#pragma once

#include <cstdint>
#include <span>

namespace hdff {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent 64-bit seed for sub-stream `stream` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Counter-based generator: every draw is a pure function of (seed, counter),
/// so any element of a random matrix can be regenerated without replaying a
/// stream. Results are identical on every platform with IEEE doubles and a
/// correctly rounded libm for log/cos/sqrt.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t counter) const;

  /// Uniform on (0, 1].
  double uniform(std::uint64_t counter) const;

  /// Standard normal. Indices 2p and 2p + 1 are the cosine and sine halves of
  /// one Box-Muller draw on counters (2p, 2p + 1).
  double gaussian(std::uint64_t index) const;

  /// out[k] = gaussian(first + k), computing each Box-Muller pair once.
  void gaussians(std::uint64_t first, std::span<double> out) const;

  /// +1 or -1 with equal probability.
  float sign(std::uint64_t counter) const;

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
};

}  // namespace hdff
