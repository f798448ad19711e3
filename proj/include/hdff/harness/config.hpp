#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "hdff/feature_map.hpp"
#include "hdff/metrics.hpp"
#include "hdff/model.hpp"

namespace hdff::harness {

/// Run-wide settings shared by every subcommand. Defaults: m = 10^4, max
/// pooling, mean-centring on, all layers.
struct ExperimentConfig {
  std::size_t hd_dim = 10000;
  std::uint64_t master_seed = 0;
  PoolingMode pooling = PoolingMode::max;
  std::vector<int> layers;  // empty: all layers in the pack
  DetectionErrorMode detection_error_mode = DetectionErrorMode::min_over_thresholds;
  double f1_step = 0.1;
  double bin_width = 1.0;
  unsigned threads = 1;

  /// Throws UsageError; `max_channels` is the widest selected layer.
  void validate(std::size_t max_channels) const;

  FitConfig fit_config() const;
  EvalOptions eval_options() const;
};

/// "3,5,7" -> {3, 5, 7}. Throws UsageError on malformed input.
std::vector<int> parse_int_list(std::string_view text);
std::vector<std::size_t> parse_size_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

}  // namespace hdff::harness
