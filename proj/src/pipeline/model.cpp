#include <algorithm>
#include <set>
#include <string>

#include "hdff/errors.hpp"
#include "hdff/model.hpp"

namespace hdff {

std::vector<LayerShape> FittedModel::layer_shapes() const {
  std::vector<LayerShape> shapes;
  shapes.reserve(layers.size());
  for (const auto& s : layers) shapes.push_back({s.layer_id, s.mean.size()});
  return shapes;
}

void FittedModel::validate() const {
  if (hd_dim == 0) throw FitError("model: hd_dim must be at least 1");
  if (classes.empty()) throw FitError("model: no class descriptors");
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& c = classes[k];
    if (k > 0 && classes[k - 1].class_id >= c.class_id) {
      throw FitError("model: class ids must be strictly ascending");
    }
    if (c.descriptor.dim() != hd_dim) {
      throw FitError("model: class " + std::to_string(c.class_id) + " descriptor has dim " +
                     std::to_string(c.descriptor.dim()) + ", expected " +
                     std::to_string(hd_dim));
    }
    if (c.descriptor.norm() == 0.0) {
      throw FitError("model: class " + std::to_string(c.class_id) + " descriptor is all zero");
    }
  }

  if (!is_ensemble()) {
    if (!binding_seeds.empty()) throw FitError("model: binding seeds without ensemble members");
    if (layers.empty()) throw FitError("model: no layers");
    std::set<int> seen;
    for (const auto& s : layers) {
      if (!seen.insert(s.layer_id).second) {
        throw FitError("model: duplicate layer " + std::to_string(s.layer_id));
      }
      if (s.mean.empty()) throw FitError("model: layer " + std::to_string(s.layer_id) + " has no channels");
      if (s.mean.size() > hd_dim) {
        throw FitError("model: layer " + std::to_string(s.layer_id) + " has more channels than hd_dim");
      }
      if (s.count == 0) throw FitError("model: layer " + std::to_string(s.layer_id) + " has zero sample count");
    }
    return;
  }

  if (!layers.empty()) throw FitError("model: an ensemble carries no layers of its own");
  if (members.size() != binding_seeds.size()) {
    throw FitError("model: " + std::to_string(members.size()) + " ensemble members but " +
                   std::to_string(binding_seeds.size()) + " binding seeds");
  }
  for (const auto& member : members) {
    if (member.is_ensemble()) throw FitError("model: nested ensembles are not supported");
    member.validate();
    if (member.hd_dim != hd_dim) throw FitError("model: ensemble member hd_dim mismatch");
    if (member.classes.size() != classes.size()) {
      throw FitError("model: ensemble member class set mismatch");
    }
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (member.classes[k].class_id != classes[k].class_id) {
        throw FitError("model: ensemble member class set mismatch");
      }
    }
  }
}

ProjectionSet projections_for(const FittedModel& model) {
  if (model.is_ensemble()) {
    throw UsageError("projections_for: ensemble models have per-member projections");
  }
  const auto shapes = model.layer_shapes();
  return ProjectionSet::generate(model.master_seed, model.hd_dim, shapes);
}

HdVector descriptor_from_centered(std::span<const PooledVector> centered,
                                  const ProjectionSet& projections) {
  if (centered.empty()) throw UsageError("image_descriptor: no layers");
  const std::size_t m = projections.hd_dim();
  std::vector<double> acc(m, 0.0);
  std::vector<double> h(m);
  for (const auto& v : centered) {
    project_into(projections.for_layer(v.layer_id), v.values, h);
    for (std::size_t i = 0; i < m; ++i) acc[i] += h[i];
  }
  return HdVector::from_accumulator(acc);
}

HdVector image_descriptor(std::span<const LayerFeatureMap> maps, const FittedModel& model,
                          const ProjectionSet& projections) {
  if (model.is_ensemble()) {
    throw UsageError("image_descriptor: use ensemble_image_descriptor for ensemble models");
  }
  std::vector<PooledVector> centered;
  centered.reserve(model.layers.size());
  for (const auto& stats : model.layers) {
    const auto it = std::find_if(maps.begin(), maps.end(), [&](const LayerFeatureMap& map) {
      return map.layer_id() == stats.layer_id;
    });
    if (it == maps.end()) {
      throw DimensionError("image_descriptor: missing feature map for layer " +
                           std::to_string(stats.layer_id));
    }
    if (it->channels() != stats.mean.size()) {
      throw DimensionError("image_descriptor: layer " + std::to_string(stats.layer_id) +
                           " of sample " + std::to_string(it->sample_id()) + " has " +
                           std::to_string(it->channels()) + " channels, model expects " +
                           std::to_string(stats.mean.size()));
    }
    centered.push_back(center(pool(*it, model.pooling), stats));
  }
  return descriptor_from_centered(centered, projections);
}

InMemorySource::InMemorySource(std::vector<Sample> samples, bool labelled)
    : samples_(std::move(samples)), labelled_(labelled) {}

std::vector<LayerShape> InMemorySource::layers() const {
  std::vector<LayerShape> shapes;
  if (samples_.empty()) return shapes;
  for (const auto& map : samples_.front().maps) shapes.push_back({map.layer_id(), map.channels()});
  return shapes;
}

std::vector<LayerFeatureMap> InMemorySource::read(std::size_t index,
                                                  std::span<const int> layer_ids) const {
  const auto& sample = samples_.at(index);
  std::vector<LayerFeatureMap> out;
  out.reserve(layer_ids.size());
  for (int id : layer_ids) {
    const auto it = std::find_if(sample.maps.begin(), sample.maps.end(),
                                 [&](const LayerFeatureMap& m) { return m.layer_id() == id; });
    if (it == sample.maps.end()) {
      throw DimensionError("sample " + std::to_string(index) + " has no map for layer " +
                           std::to_string(id));
    }
    out.push_back(*it);
  }
  return out;
}

}  // namespace hdff
