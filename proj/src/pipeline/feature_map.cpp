#include "hdff/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hdff/errors.hpp"

namespace hdff {

std::string_view to_string(PoolingMode mode) {
  return mode == PoolingMode::max ? "max" : "avg";
}

PoolingMode parse_pooling(std::string_view text) {
  if (text == "max") return PoolingMode::max;
  if (text == "avg") return PoolingMode::avg;
  throw UsageError("unknown pooling mode '" + std::string(text) + "' (expected max or avg)");
}

LayerFeatureMap::LayerFeatureMap(std::vector<float> values, std::size_t height, std::size_t width,
                                 std::size_t channels, int layer_id, std::int64_t sample_id)
    : values_(std::move(values)),
      height_(height),
      width_(width),
      channels_(channels),
      layer_id_(layer_id),
      sample_id_(sample_id) {
  const std::string where =
      "layer " + std::to_string(layer_id) + " of sample " + std::to_string(sample_id);
  if (height == 0 || width == 0 || channels == 0) {
    throw DimensionError("feature map for " + where + " has a zero dimension");
  }
  if (values_.size() != height * width * channels) {
    throw DimensionError("feature map for " + where + " has " + std::to_string(values_.size()) +
                         " values, expected " + std::to_string(height * width * channels));
  }
  const auto bad = std::find_if(values_.begin(), values_.end(),
                                [](float x) { return !std::isfinite(x); });
  if (bad != values_.end()) {
    throw DimensionError("feature map for " + where + " has a non-finite value at index " +
                         std::to_string(bad - values_.begin()));
  }
}

PooledVector pool(const LayerFeatureMap& map, PoolingMode mode) {
  const std::size_t c = map.channels();
  const std::size_t cells = map.height() * map.width();
  const auto values = map.values();
  PooledVector out{map.layer_id(), {}};

  if (mode == PoolingMode::max) {
    out.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(c));
    for (std::size_t cell = 1; cell < cells; ++cell) {
      const float* row = values.data() + cell * c;
      for (std::size_t k = 0; k < c; ++k) out.values[k] = std::max(out.values[k], row[k]);
    }
    return out;
  }

  std::vector<double> sum(c, 0.0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const float* row = values.data() + cell * c;
    for (std::size_t k = 0; k < c; ++k) sum[k] += row[k];
  }
  out.values.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    out.values[k] = static_cast<float>(sum[k] / static_cast<double>(cells));
  }
  return out;
}

PooledVector center(const PooledVector& v, const LayerStats& stats) {
  if (v.values.size() != stats.mean.size()) {
    throw DimensionError("center: layer " + std::to_string(v.layer_id) + " has " +
                         std::to_string(v.values.size()) + " channels, mean has " +
                         std::to_string(stats.mean.size()));
  }
  PooledVector out{v.layer_id, std::vector<float>(v.values.size())};
  for (std::size_t k = 0; k < v.values.size(); ++k) out.values[k] = v.values[k] - stats.mean[k];
  return out;
}

}  // namespace hdff
