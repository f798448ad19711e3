#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "hdff/errors.hpp"
#include "hdff/model.hpp"
#include "hdff/parallel.hpp"

namespace hdff {

namespace {

std::vector<int> ids_of(std::span<const LayerShape> layers) {
  std::vector<int> ids;
  ids.reserve(layers.size());
  for (const auto& l : layers) ids.push_back(l.layer_id);
  return ids;
}

std::vector<LayerFeatureMap> read_checked(const SampleSource& source, std::size_t index,
                                          std::span<const LayerShape> layers,
                                          std::span<const int> ids) {
  auto maps = source.read(index, ids);
  if (maps.size() != layers.size()) {
    throw FitError("sample " + std::to_string(index) + ": expected " +
                   std::to_string(layers.size()) + " layer maps, got " +
                   std::to_string(maps.size()));
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (maps[l].layer_id() != layers[l].layer_id || maps[l].channels() != layers[l].channels) {
      throw FitError("sample " + std::to_string(index) + ", layer " +
                     std::to_string(layers[l].layer_id) + ": got " +
                     std::to_string(maps[l].channels()) + " channels, expected " +
                     std::to_string(layers[l].channels));
    }
  }
  return maps;
}

using Accumulator = std::vector<double>;

}  // namespace

std::vector<LayerShape> select_layers(const SampleSource& source, const FitConfig& config) {
  const auto available = source.layers();
  if (available.empty()) throw UsageError("source has no layers");
  if (config.layers.empty()) return available;

  std::vector<LayerShape> chosen;
  for (const auto& shape : available) {
    if (std::find(config.layers.begin(), config.layers.end(), shape.layer_id) !=
        config.layers.end()) {
      chosen.push_back(shape);
    }
  }
  for (int id : config.layers) {
    const bool found = std::any_of(available.begin(), available.end(),
                                   [&](const LayerShape& s) { return s.layer_id == id; });
    if (!found) throw UsageError("layer " + std::to_string(id) + " is not present in the source");
  }
  return chosen;
}

FittedModel fit(const SampleSource& source, const FitConfig& config) {
  const auto layers = select_layers(source, config);
  return fit(source, config, ProjectionSet::generate(config.master_seed, config.hd_dim, layers));
}

FittedModel fit(const SampleSource& source, const FitConfig& config,
                const ProjectionSet& projections) {
  if (!source.has_labels()) throw FitError("training source has no class labels");
  const std::size_t n = source.size();
  if (n == 0) throw FitError("training source is empty");
  if (projections.hd_dim() != config.hd_dim) {
    throw UsageError("fit: projections built for hd_dim " + std::to_string(projections.hd_dim()) +
                     ", config asks for " + std::to_string(config.hd_dim));
  }

  const auto layers = select_layers(source, config);
  const auto ids = ids_of(layers);
  for (const auto& shape : layers) {
    const auto& p = projections.for_layer(shape.layer_id);
    if (p.cols() != shape.channels) {
      throw DimensionError("fit: projection for layer " + std::to_string(shape.layer_id) +
                           " has " + std::to_string(p.cols()) + " columns, layer has " +
                           std::to_string(shape.channels) + " channels");
    }
  }

  // Class bookkeeping.
  std::map<int, std::size_t> class_counts;
  for (std::size_t i = 0; i < n; ++i) ++class_counts[source.label(i)];
  const auto declared_list =
      config.declared_classes.empty() ? source.declared_classes() : config.declared_classes;
  if (!declared_list.empty()) {
    const std::set<int> declared(declared_list.begin(), declared_list.end());
    for (const auto& [label, count] : class_counts) {
      if (!declared.contains(label)) {
        throw FitError("label " + std::to_string(label) + " is not a declared class");
      }
    }
    for (int c : declared) {
      if (!class_counts.contains(c)) {
        throw FitError("class " + std::to_string(c) + " has zero training samples");
      }
    }
  }

  const std::size_t chunks = chunk_count(n);

  // Pass 1: per-layer mean of pooled vectors.
  std::vector<std::vector<Accumulator>> partial_sums(chunks);
  parallel_for(chunks, config.threads, [&](std::size_t chunk) {
    auto& sums = partial_sums[chunk];
    sums.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) sums[l].assign(layers[l].channels, 0.0);
    const std::size_t end = std::min(n, (chunk + 1) * kChunkSize);
    for (std::size_t i = chunk * kChunkSize; i < end; ++i) {
      const auto maps = read_checked(source, i, layers, ids);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto pooled = pool(maps[l], config.pooling);
        for (std::size_t k = 0; k < pooled.values.size(); ++k) sums[l][k] += pooled.values[k];
      }
    }
  });

  FittedModel model;
  model.hd_dim = config.hd_dim;
  model.master_seed = config.master_seed;
  model.pooling = config.pooling;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Accumulator total(layers[l].channels, 0.0);
    for (const auto& sums : partial_sums) {
      for (std::size_t k = 0; k < total.size(); ++k) total[k] += sums[l][k];
    }
    LayerStats stats{layers[l].layer_id, std::vector<float>(total.size()), n};
    for (std::size_t k = 0; k < total.size(); ++k) {
      stats.mean[k] = static_cast<float>(total[k] / static_cast<double>(n));
    }
    model.layers.push_back(std::move(stats));
  }

  // Pass 2: bundle image descriptors per class.
  const std::size_t m = config.hd_dim;
  std::vector<std::map<int, Accumulator>> partial_bundles(chunks);
  parallel_for(chunks, config.threads, [&](std::size_t chunk) {
    auto& bundles = partial_bundles[chunk];
    const std::size_t end = std::min(n, (chunk + 1) * kChunkSize);
    for (std::size_t i = chunk * kChunkSize; i < end; ++i) {
      const auto maps = read_checked(source, i, layers, ids);
      const HdVector y = image_descriptor(maps, model, projections);
      auto& acc = bundles[source.label(i)];
      if (acc.empty()) acc.assign(m, 0.0);
      const auto v = y.values();
      for (std::size_t k = 0; k < m; ++k) acc[k] += v[k];
    }
  });

  for (const auto& [label, count] : class_counts) {
    Accumulator total(m, 0.0);
    for (const auto& bundles : partial_bundles) {
      const auto it = bundles.find(label);
      if (it == bundles.end()) continue;
      for (std::size_t k = 0; k < m; ++k) total[k] += it->second[k];
    }
    HdVector d = HdVector::from_accumulator(total);
    if (d.norm() == 0.0) {
      throw FitError("class " + std::to_string(label) + " (" + std::to_string(count) +
                     " sample(s)) produced an all-zero descriptor; mean-centring a single "
                     "sample, or identical samples, leaves nothing to bundle");
    }
    model.classes.push_back({label, std::move(d)});
  }
  return model;
}

std::vector<HdVector> describe(const SampleSource& source, const FittedModel& model,
                               const ProjectionSet& projections, unsigned threads) {
  const std::size_t n = source.size();
  std::vector<int> ids;
  for (const auto& s : model.layers) ids.push_back(s.layer_id);
  std::vector<HdVector> out(n);
  parallel_for(chunk_count(n), threads, [&](std::size_t chunk) {
    const std::size_t end = std::min(n, (chunk + 1) * kChunkSize);
    for (std::size_t i = chunk * kChunkSize; i < end; ++i) {
      const auto maps = source.read(i, ids);
      out[i] = image_descriptor(maps, model, projections);
    }
  });
  return out;
}

}  // namespace hdff
