#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hdff {

enum class PoolingMode { max, avg };

std::string_view to_string(PoolingMode mode);

/// Accepts "max" or "avg"; throws UsageError otherwise.
PoolingMode parse_pooling(std::string_view text);

/// Activations of one layer for one sample, stored height x width x channels
/// in row-major order.
class LayerFeatureMap {
 public:
  LayerFeatureMap(std::vector<float> values, std::size_t height, std::size_t width,
                  std::size_t channels, int layer_id, std::int64_t sample_id = 0);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  int layer_id() const { return layer_id_; }
  std::int64_t sample_id() const { return sample_id_; }
  std::span<const float> values() const { return values_; }

  float at(std::size_t h, std::size_t w, std::size_t c) const {
    return values_[(h * width_ + w) * channels_ + c];
  }

 private:
  std::vector<float> values_;
  std::size_t height_;
  std::size_t width_;
  std::size_t channels_;
  int layer_id_;
  std::int64_t sample_id_;
};

struct PooledVector {
  int layer_id = 0;
  std::vector<float> values;
};

/// Training-set mean of the pooled vectors of one layer.
struct LayerStats {
  int layer_id = 0;
  std::vector<float> mean;
  std::uint64_t count = 0;

  friend bool operator==(const LayerStats&, const LayerStats&) = default;
};

/// Per-channel max or mean over the spatial grid.
PooledVector pool(const LayerFeatureMap& map, PoolingMode mode);

/// v - mean, element-wise.
PooledVector center(const PooledVector& v, const LayerStats& stats);

}  // namespace hdff
