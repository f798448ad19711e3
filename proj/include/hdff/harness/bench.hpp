#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hdff::harness {

struct BenchConfig {
  std::size_t hd_dim = 10000;
  std::vector<std::size_t> channels{64, 128, 256, 512, 1024};
  std::size_t repeats = 21;
  std::size_t batch = 8;  // pooled vectors projected and bundled per timed rep
  std::uint64_t seed = 0;
};

struct BenchRow {
  std::size_t channels = 0;
  double median_seconds = 0.0;
  double min_seconds = 0.0;
  double max_seconds = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct BenchResult {
  BenchConfig config;
  std::vector<BenchRow> rows;
  LinearFit fit;  // median seconds against channels
};

/// Times projection plus bundling of `batch` pooled vectors for each channel
/// count, after one untimed warm-up rep.
BenchResult run_bench(const BenchConfig& config);

}  // namespace hdff::harness
