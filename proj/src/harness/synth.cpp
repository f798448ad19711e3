#include "hdff/harness/synth.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "hdff/errors.hpp"
#include "hdff/feature_pack.hpp"
#include "hdff/rng.hpp"

namespace hdff::harness {

namespace {

enum Stream : std::uint64_t {
  kPrototypes = 1,
  kOodOffsets = 2,
  kTrainNoise = 10,
  kTestNoise = 11,
  kOodNoise = 12,
};

double weight(const std::vector<double>& weights, std::size_t l) {
  return weights.empty() ? 1.0 : weights[l];
}

class Generator {
 public:
  explicit Generator(const SyntheticSpec& spec)
      : spec_(spec),
        prototypes_(derive_seed(spec.seed, kPrototypes)),
        offsets_(derive_seed(spec.seed, kOodOffsets)) {
    std::size_t offset = 0;
    for (auto c : spec.channels) {
      channel_offset_.push_back(offset);
      offset += c;
    }
    total_channels_ = offset;
  }

  Manifest manifest(const std::string& split, std::size_t n, bool labelled) const {
    Manifest m;
    m.dataset_name = "synthetic";
    m.split = split;
    m.num_samples = n;
    if (labelled) {
      std::vector<int> classes;
      for (std::size_t k = 0; k < spec_.num_classes; ++k) classes.push_back(static_cast<int>(k));
      m.classes = classes;
    }
    for (std::size_t l = 0; l < spec_.channels.size(); ++l) {
      LayerEntry e;
      e.layer_id = static_cast<int>(l);
      e.name = "synthetic_" + std::to_string(l);
      e.channels = spec_.channels[l];
      e.height = spec_.spatial;
      e.width = spec_.spatial;
      m.layers.push_back(e);
    }
    return m;
  }

  /// Per-channel centre of one layer of a sample; `ood_cluster` adds the
  /// cluster's offset on top of its base class prototype.
  std::vector<double> centre(std::size_t base_class, std::optional<std::size_t> ood_cluster,
                             std::size_t l) const {
    const std::size_t c = spec_.channels[l];
    std::vector<double> out(c);
    const double proto_scale = spec_.prototype_scale * weight(spec_.layer_signal, l);
    const double shift_scale = spec_.ood_shift * weight(spec_.ood_layer_shift, l);
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t index = channel_offset_[l] + ch;
      out[ch] = proto_scale * prototypes_.gaussian(base_class * total_channels_ + index);
      if (ood_cluster) {
        out[ch] += shift_scale * offsets_.gaussian(*ood_cluster * total_channels_ + index);
      }
    }
    return out;
  }

  std::vector<LayerFeatureMap> sample(std::size_t base_class, std::optional<std::size_t> ood_cluster,
                                      const CounterRng& noise, std::size_t sample_index) const {
    const std::size_t cells = spec_.spatial * spec_.spatial;
    std::vector<LayerFeatureMap> maps;
    maps.reserve(spec_.channels.size());
    for (std::size_t l = 0; l < spec_.channels.size(); ++l) {
      const std::size_t c = spec_.channels[l];
      const auto mu = centre(base_class, ood_cluster, l);
      const std::uint64_t base = (sample_index * total_channels_ + channel_offset_[l]) * cells;
      std::vector<float> values(cells * c);
      for (std::size_t cell = 0; cell < cells; ++cell) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double eps = noise.gaussian(base + ch * cells + cell);
          values[cell * c + ch] = static_cast<float>(mu[ch] + spec_.noise_scale * eps);
        }
      }
      maps.emplace_back(std::move(values), spec_.spatial, spec_.spatial, c, static_cast<int>(l),
                        static_cast<std::int64_t>(sample_index));
    }
    return maps;
  }

 private:
  const SyntheticSpec& spec_;
  CounterRng prototypes_;
  CounterRng offsets_;
  std::vector<std::size_t> channel_offset_;
  std::size_t total_channels_ = 0;
};

}  // namespace

void SyntheticSpec::validate() const {
  if (num_classes == 0 || train_per_class == 0 || test_per_class == 0) {
    throw UsageError("synthetic spec: class and sample counts must be at least 1");
  }
  if (channels.empty()) throw UsageError("synthetic spec: at least one layer is required");
  for (auto c : channels) {
    if (c == 0) throw UsageError("synthetic spec: channel counts must be at least 1");
  }
  if (spatial == 0) throw UsageError("synthetic spec: spatial size must be at least 1");
  for (double s : {prototype_scale, noise_scale, ood_shift}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw UsageError("synthetic spec: scales must be >= 0");
  }
  for (const auto* weights : {&layer_signal, &ood_layer_shift}) {
    if (!weights->empty() && weights->size() != channels.size()) {
      throw UsageError("synthetic spec: per-layer weights need one entry per layer");
    }
    for (double w : *weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw UsageError("synthetic spec: weights must be >= 0");
    }
  }
}

SyntheticPacks generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  const Generator gen(spec);
  SyntheticPacks packs{out_dir / "train", out_dir / "test", out_dir / "ood"};

  auto write_labelled = [&](const std::filesystem::path& dir, const std::string& split,
                            std::size_t per_class, Stream stream) {
    const std::size_t n = per_class * spec.num_classes;
    FeaturePackWriter writer(dir, gen.manifest(split, n, true));
    const CounterRng noise(derive_seed(spec.seed, stream));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = i % spec.num_classes;
      const auto maps = gen.sample(k, std::nullopt, noise, i);
      writer.append(maps, static_cast<int>(k));
    }
    writer.finish();
  };
  write_labelled(packs.train, "train", spec.train_per_class, kTrainNoise);
  write_labelled(packs.test, "test", spec.test_per_class, kTestNoise);

  const std::size_t n_ood =
      spec.ood_samples > 0 ? spec.ood_samples : spec.num_classes * spec.test_per_class;
  FeaturePackWriter writer(packs.ood, gen.manifest("ood", n_ood, false));
  const CounterRng noise(derive_seed(spec.seed, kOodNoise));
  for (std::size_t i = 0; i < n_ood; ++i) {
    const std::size_t cluster = i % spec.num_classes;
    const auto maps = gen.sample(cluster, cluster, noise, i);
    writer.append(maps);
  }
  writer.finish();
  return packs;
}

}  // namespace hdff::harness
