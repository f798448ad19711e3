#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hdff {

/// A point in the m-dimensional hyperspace. Immutable once built; entries are
/// finite 32-bit floats and the dimension is at least one.
class HdVector {
 public:
  HdVector() = default;
  explicit HdVector(std::vector<float> values);

  static HdVector zeros(std::size_t dim);

  /// Rounds 64-bit accumulators to a vector. Used by projection and bundling.
  static HdVector from_accumulator(std::span<const double> acc);

  std::size_t dim() const { return values_.size(); }
  std::span<const float> values() const { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }

  /// Euclidean norm, accumulated in double.
  double norm() const;

  friend bool operator==(const HdVector&, const HdVector&) = default;

 private:
  std::vector<float> values_;
};

/// Inner product accumulated in double.
double dot(std::span<const float> a, std::span<const float> b);

/// Cosine similarity. Throws DegenerateInputError if either norm is zero.
double cosine(const HdVector& a, const HdVector& b);

/// Angle in degrees, in [0, 180]. The cosine is clamped to [-1, 1] first.
double angle_degrees(const HdVector& a, const HdVector& b);

/// Element-wise sum without normalisation, accumulated in double in input
/// order and rounded once.
HdVector bundle(std::span<const HdVector> inputs);

/// Element-wise (Hadamard) product.
HdVector bind(const HdVector& a, const HdVector& b);

/// i.i.d. uniform {-1, +1} entries, deterministic in `seed`.
HdVector random_rademacher(std::uint64_t seed, std::size_t dim);

/// i.i.d. standard normal entries, deterministic in `seed`.
HdVector random_gaussian(std::uint64_t seed, std::size_t dim);

}  // namespace hdff
