#include "hdff/feature_pack.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>

#include "hdff/errors.hpp"
#include "hdff/npy.hpp"
#include "json.hpp"

namespace hdff {

using nlohmann::json;

std::string Manifest::to_json() const {
  json j;
  j["format_version"] = format_version;
  j["dataset_name"] = dataset_name;
  j["split"] = split;
  j["num_samples"] = num_samples;
  if (class_labels) j["class_labels"] = *class_labels;
  if (classes) j["classes"] = *classes;
  j["layers"] = json::array();
  for (const auto& l : layers) {
    j["layers"].push_back({{"layer_id", l.layer_id},
                           {"name", l.name},
                           {"channels", l.channels},
                           {"height", l.height},
                           {"width", l.width},
                           {"file", l.file},
                           {"dtype", l.dtype},
                           {"order", l.order}});
  }
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string& text, const std::string& origin) {
  Manifest m;
  try {
    const json j = json::parse(text);
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kFeaturePackVersion) {
      throw FormatError(origin + ": manifest format_version " + std::to_string(m.format_version) +
                        " is unsupported, expected " + std::to_string(kFeaturePackVersion));
    }
    m.dataset_name = j.at("dataset_name").get<std::string>();
    m.split = j.at("split").get<std::string>();
    m.num_samples = j.at("num_samples").get<std::size_t>();
    if (j.contains("class_labels") && !j["class_labels"].is_null()) {
      m.class_labels = j["class_labels"].get<std::vector<int>>();
    }
    if (j.contains("classes") && !j["classes"].is_null()) {
      m.classes = j["classes"].get<std::vector<int>>();
    }
    for (const auto& l : j.at("layers")) {
      LayerEntry e;
      e.layer_id = l.at("layer_id").get<int>();
      e.name = l.value("name", "layer_" + std::to_string(e.layer_id));
      e.channels = l.at("channels").get<std::size_t>();
      e.height = l.at("height").get<std::size_t>();
      e.width = l.at("width").get<std::size_t>();
      e.file = l.at("file").get<std::string>();
      e.dtype = l.value("dtype", std::string("<f4"));
      e.order = l.value("order", std::string("C"));
      m.layers.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError(origin + ": invalid manifest: " + e.what());
  }
  return m;
}

struct FeaturePack::LayerFile {
  LayerEntry entry;
  std::filesystem::path path;
  std::size_t data_offset = 0;
  int fd = -1;

  LayerFile() = default;
  LayerFile(const LayerFile&) = delete;
  LayerFile& operator=(const LayerFile&) = delete;
  ~LayerFile() {
    if (fd >= 0) ::close(fd);
  }
};

FeaturePack FeaturePack::open(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  FeaturePack pack;
  pack.root_ = dir;
  pack.manifest_ = Manifest::from_json(text, manifest_path.string());
  const auto& m = pack.manifest_;

  if (m.layers.empty()) throw UsageError(manifest_path.string() + ": empty layer list");
  if (m.class_labels && m.class_labels->size() != m.num_samples) {
    throw FormatError(manifest_path.string() + ": " + std::to_string(m.class_labels->size()) +
                      " class labels for " + std::to_string(m.num_samples) + " samples");
  }

  std::set<int> seen;
  for (const auto& entry : m.layers) {
    const std::string what = "layer " + std::to_string(entry.layer_id) + " ('" + entry.name + "')";
    if (!seen.insert(entry.layer_id).second) {
      throw FormatError(manifest_path.string() + ": duplicate " + what);
    }
    if (entry.dtype != "<f4") {
      throw FormatError(manifest_path.string() + ": " + what + " has dtype '" + entry.dtype +
                        "', expected '<f4'");
    }
    if (entry.order != "C") {
      throw FormatError(manifest_path.string() + ": " + what + " has order '" + entry.order +
                        "', expected 'C'");
    }
    if (entry.slab_elements() == 0) {
      throw FormatError(manifest_path.string() + ": " + what + " has a zero dimension");
    }

    auto file = std::make_shared<LayerFile>();
    file->entry = entry;
    file->path = dir / entry.file;
    if (!std::filesystem::exists(file->path)) {
      throw IoError(what + ": missing file " + file->path.string());
    }
    const NpyHeader header = read_npy_header(file->path);
    file->data_offset = header.data_offset;

    const std::size_t expected =
        header.data_offset + m.num_samples * entry.slab_elements() * sizeof(float);
    const auto actual = std::filesystem::file_size(file->path);
    if (actual != expected) {
      throw FormatError(what + ": " + file->path.string() + " has " + std::to_string(actual) +
                        " bytes, expected " + std::to_string(expected) + " for " +
                        std::to_string(m.num_samples) + " samples");
    }
    const std::vector<std::size_t> shape{m.num_samples, entry.height, entry.width, entry.channels};
    if (header.shape != shape) {
      throw FormatError(what + ": NPY shape does not match the manifest (expected (N, H, W, C))");
    }

    file->fd = ::open(file->path.c_str(), O_RDONLY | O_CLOEXEC);
    if (file->fd < 0) {
      throw IoError("cannot open " + file->path.string() + ": " + std::strerror(errno));
    }
    pack.files_.push_back(std::move(file));
  }
  return pack;
}

const FeaturePack::LayerFile& FeaturePack::layer_file(int layer_id) const {
  for (const auto& f : files_) {
    if (f->entry.layer_id == layer_id) return *f;
  }
  throw UsageError(root_.string() + ": no layer " + std::to_string(layer_id));
}

LayerFeatureMap FeaturePack::read_map(std::size_t sample, int layer_id) const {
  if (sample >= manifest_.num_samples) {
    throw UsageError(root_.string() + ": sample " + std::to_string(sample) + " out of range (" +
                     std::to_string(manifest_.num_samples) + " samples)");
  }
  const LayerFile& f = layer_file(layer_id);
  const std::size_t count = f.entry.slab_elements();
  std::vector<float> values(count);
  const std::size_t bytes = count * sizeof(float);
  const auto offset = static_cast<off_t>(f.data_offset + sample * bytes);
  auto* dst = reinterpret_cast<char*>(values.data());
  std::size_t done = 0;
  while (done < bytes) {
    const ssize_t got = ::pread(f.fd, dst + done, bytes - done, offset + static_cast<off_t>(done));
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) {
      throw IoError("short read from " + f.path.string() + " at sample " + std::to_string(sample));
    }
    done += static_cast<std::size_t>(got);
  }
  return LayerFeatureMap(std::move(values), f.entry.height, f.entry.width, f.entry.channels,
                         layer_id, static_cast<std::int64_t>(sample));
}

std::vector<LayerShape> FeaturePack::layers() const {
  std::vector<LayerShape> out;
  for (const auto& l : manifest_.layers) out.push_back({l.layer_id, l.channels});
  return out;
}

int FeaturePack::label(std::size_t index) const {
  if (!manifest_.class_labels) throw UsageError(root_.string() + ": pack has no class labels");
  return manifest_.class_labels->at(index);
}

std::vector<LayerFeatureMap> FeaturePack::read(std::size_t index,
                                               std::span<const int> layer_ids) const {
  std::vector<LayerFeatureMap> out;
  out.reserve(layer_ids.size());
  for (int id : layer_ids) out.push_back(read_map(index, id));
  return out;
}

FeaturePackWriter::FeaturePackWriter(std::filesystem::path dir, Manifest manifest)
    : dir_(std::move(dir)), manifest_(std::move(manifest)) {
  if (manifest_.layers.empty()) throw UsageError("FeaturePackWriter: empty layer list");
  std::filesystem::create_directories(dir_);
  manifest_.class_labels.reset();
  for (auto& l : manifest_.layers) {
    if (l.file.empty()) l.file = "layer_" + std::to_string(l.layer_id) + ".npy";
    if (l.name.empty()) l.name = "layer_" + std::to_string(l.layer_id);
    const auto path = dir_ / l.file;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const std::vector<std::size_t> shape{manifest_.num_samples, l.height, l.width, l.channels};
    const std::string header = make_npy_header(shape);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    streams_.push_back(std::move(out));
  }
}

FeaturePackWriter::~FeaturePackWriter() = default;

void FeaturePackWriter::append(std::span<const LayerFeatureMap> maps, std::optional<int> label) {
  if (finished_) throw UsageError("FeaturePackWriter: append after finish");
  if (written_ >= manifest_.num_samples) {
    throw UsageError("FeaturePackWriter: more than " + std::to_string(manifest_.num_samples) +
                     " samples appended");
  }
  if (written_ == 0) labelled_ = label.has_value();
  if (label.has_value() != labelled_) {
    throw UsageError("FeaturePackWriter: mix of labelled and unlabelled samples");
  }
  if (maps.size() != manifest_.layers.size()) {
    throw DimensionError("FeaturePackWriter: expected " + std::to_string(manifest_.layers.size()) +
                         " maps, got " + std::to_string(maps.size()));
  }
  for (std::size_t l = 0; l < maps.size(); ++l) {
    const auto& e = manifest_.layers[l];
    const auto& map = maps[l];
    if (map.layer_id() != e.layer_id || map.height() != e.height || map.width() != e.width ||
        map.channels() != e.channels) {
      throw DimensionError("FeaturePackWriter: sample " + std::to_string(written_) + ", layer " +
                           std::to_string(e.layer_id) + " does not match the manifest shape");
    }
  }
  for (std::size_t l = 0; l < maps.size(); ++l) {
    const auto values = maps[l].values();
    streams_[l].write(reinterpret_cast<const char*>(values.data()),
                      static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (!streams_[l]) throw IoError("write failed for " + (dir_ / manifest_.layers[l].file).string());
  }
  if (label) labels_.push_back(*label);
  ++written_;
}

void FeaturePackWriter::finish() {
  if (finished_) return;
  if (written_ != manifest_.num_samples) {
    throw UsageError("FeaturePackWriter: " + std::to_string(written_) + " samples written, " +
                     std::to_string(manifest_.num_samples) + " declared");
  }
  for (std::size_t l = 0; l < streams_.size(); ++l) {
    streams_[l].close();
    if (!streams_[l]) throw IoError("close failed for " + (dir_ / manifest_.layers[l].file).string());
  }
  if (labelled_) manifest_.class_labels = labels_;
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << manifest_.to_json();
  if (!out) throw IoError("write failed for " + path.string());
  finished_ = true;
}

}  // namespace hdff
