#include "hdff/hd_vector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hdff/errors.hpp"
#include "hdff/rng.hpp"

namespace hdff {

HdVector::HdVector(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw DimensionError("HdVector: dimension must be at least 1");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DimensionError("HdVector: non-finite entry at index " + std::to_string(i));
    }
  }
}

HdVector HdVector::zeros(std::size_t dim) { return HdVector(std::vector<float>(dim, 0.0f)); }

HdVector HdVector::from_accumulator(std::span<const double> acc) {
  std::vector<float> values(acc.size());
  std::transform(acc.begin(), acc.end(), values.begin(),
                 [](double x) { return static_cast<float>(x); });
  return HdVector(std::move(values));
}

double HdVector::norm() const { return std::sqrt(dot(values_, values_)); }

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: length " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

double cosine(const HdVector& a, const HdVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("cosine: dim " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateInputError("cosine: zero-norm vector (all-zero descriptor upstream?)");
  }
  return dot(a.values(), b.values()) / (na * nb);
}

double angle_degrees(const HdVector& a, const HdVector& b) {
  const double c = std::clamp(cosine(a, b), -1.0, 1.0);
  return std::acos(c) * (180.0 / std::numbers::pi);
}

HdVector bundle(std::span<const HdVector> inputs) {
  if (inputs.empty()) throw UsageError("bundle: empty input sequence");
  const std::size_t m = inputs.front().dim();
  std::vector<double> acc(m, 0.0);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].dim() != m) {
      throw DimensionError("bundle: input " + std::to_string(k) + " has dim " +
                           std::to_string(inputs[k].dim()) + ", expected " + std::to_string(m));
    }
    const auto v = inputs[k].values();
    for (std::size_t i = 0; i < m; ++i) acc[i] += static_cast<double>(v[i]);
  }
  return HdVector::from_accumulator(acc);
}

HdVector bind(const HdVector& a, const HdVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("bind: dim " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  }
  std::vector<float> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return HdVector(std::move(out));
}

HdVector random_rademacher(std::uint64_t seed, std::size_t dim) {
  if (dim == 0) throw UsageError("random_rademacher: dim must be at least 1");
  const CounterRng rng(seed);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = rng.sign(i);
  return HdVector(std::move(out));
}

HdVector random_gaussian(std::uint64_t seed, std::size_t dim) {
  if (dim == 0) throw UsageError("random_gaussian: dim must be at least 1");
  const CounterRng rng(seed);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(rng.gaussian(i));
  return HdVector(std::move(out));
}

}  // namespace hdff
