#include "hdff/rng.hpp"

#include <cmath>
#include <numbers>

namespace hdff {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(mix64(master + kGolden) ^ (kGolden * (stream + 1)));
}

CounterRng::CounterRng(std::uint64_t seed) : seed_(seed), key_(mix64(seed + kGolden)) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return mix64(key_ + kGolden * (counter + 1));
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t index) const {
  const std::uint64_t pair = index & ~std::uint64_t{1};
  const double r = std::sqrt(-2.0 * std::log(uniform(pair)));
  const double phase = 2.0 * std::numbers::pi * uniform(pair + 1);
  return (index & 1) != 0 ? r * std::sin(phase) : r * std::cos(phase);
}

void CounterRng::gaussians(std::uint64_t first, std::span<double> out) const {
  std::size_t k = 0;
  if ((first & 1) != 0 && !out.empty()) out[k++] = gaussian(first);
  for (; k + 1 < out.size(); k += 2) {
    const std::uint64_t pair = first + k;
    const double r = std::sqrt(-2.0 * std::log(uniform(pair)));
    const double phase = 2.0 * std::numbers::pi * uniform(pair + 1);
    out[k] = r * std::cos(phase);
    out[k + 1] = r * std::sin(phase);
  }
  if (k < out.size()) out[k] = gaussian(first + k);
}

float CounterRng::sign(std::uint64_t counter) const {
  return (bits(counter) >> 63) != 0 ? -1.0f : 1.0f;
}

}  // namespace hdff
