#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace hdff::harness {

/// Desk-scale stand-in for CNN features.
///
/// Every (class, layer) pair gets a per-channel Gaussian prototype scaled by
/// prototype_scale * layer_signal[l]; an ID map is that prototype broadcast
/// over the spatial grid plus i.i.d. noise of std noise_scale. OOD cluster q
/// starts from class q mod num_classes and adds a fresh per-channel Gaussian
/// offset scaled by ood_shift * ood_layer_shift[l], so ood_shift = 0 makes
/// the OOD split distributed exactly like the ID test split.
struct SyntheticSpec {
  std::size_t num_classes = 4;
  std::size_t train_per_class = 200;
  std::size_t test_per_class = 100;
  std::size_t ood_samples = 0;  // 0: num_classes * test_per_class
  std::vector<std::size_t> channels{16, 32, 64, 128, 256};
  std::size_t spatial = 4;  // height = width
  double prototype_scale = 1.0;
  double noise_scale = 1.0;
  double ood_shift = 1.0;
  std::vector<double> layer_signal;     // empty: 1 for every layer
  std::vector<double> ood_layer_shift;  // empty: 1 for every layer
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticPacks {
  std::filesystem::path train;
  std::filesystem::path test;
  std::filesystem::path ood;
};

/// Writes train/, test/ and ood/ feature packs under `out_dir`.
SyntheticPacks generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace hdff::harness
