#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hdff/model.hpp"

namespace hdff {

inline constexpr int kFeaturePackVersion = 1;

struct LayerEntry {
  int layer_id = 0;
  std::string name;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::string file;
  std::string dtype = "<f4";
  std::string order = "C";

  std::size_t slab_elements() const { return height * width * channels; }
};

/// manifest.json of a feature pack. Key names are documented in
/// docs/formats.md.
struct Manifest {
  int format_version = kFeaturePackVersion;
  std::string dataset_name;
  std::string split;
  std::size_t num_samples = 0;
  std::optional<std::vector<int>> class_labels;  // one per sample
  std::optional<std::vector<int>> classes;       // declared class set
  std::vector<LayerEntry> layers;

  std::string to_json() const;
  static Manifest from_json(const std::string& text, const std::string& origin);
};

/// Read handle over a pack directory. Each (sample, layer) slab is read on
/// demand with positioned reads, so concurrent readers never share a file
/// cursor and at most one sample's maps are buffered per call.
class FeaturePack : public SampleSource {
 public:
  /// Parses the manifest and checks every layer file's header and size.
  static FeaturePack open(const std::filesystem::path& dir);

  const Manifest& manifest() const { return manifest_; }
  const std::filesystem::path& root() const { return root_; }

  LayerFeatureMap read_map(std::size_t sample, int layer_id) const;

  std::size_t size() const override { return manifest_.num_samples; }
  std::vector<LayerShape> layers() const override;
  bool has_labels() const override { return manifest_.class_labels.has_value(); }
  int label(std::size_t index) const override;
  std::vector<int> declared_classes() const override {
    return manifest_.classes.value_or(std::vector<int>{});
  }
  std::vector<LayerFeatureMap> read(std::size_t index,
                                    std::span<const int> layer_ids) const override;

 private:
  struct LayerFile;

  FeaturePack() = default;

  const LayerFile& layer_file(int layer_id) const;

  std::filesystem::path root_;
  Manifest manifest_;
  std::vector<std::shared_ptr<const LayerFile>> files_;
};

/// Streams samples into a new pack. Layer files are created up front with
/// their final NPY headers; `finish` checks the count and writes the manifest.
class FeaturePackWriter {
 public:
  /// `manifest` supplies dataset name, split, num_samples and the layer
  /// shapes; file names default to layer_<id>.npy.
  FeaturePackWriter(std::filesystem::path dir, Manifest manifest);
  ~FeaturePackWriter();

  FeaturePackWriter(const FeaturePackWriter&) = delete;
  FeaturePackWriter& operator=(const FeaturePackWriter&) = delete;

  /// Maps must follow the manifest's layer order and shapes.
  void append(std::span<const LayerFeatureMap> maps, std::optional<int> label = std::nullopt);

  void finish();

 private:
  std::filesystem::path dir_;
  Manifest manifest_;
  std::vector<std::ofstream> streams_;
  std::vector<int> labels_;
  std::size_t written_ = 0;
  bool labelled_ = false;
  bool finished_ = false;
};

}  // namespace hdff
