#include <string>

#include "hdff/errors.hpp"
#include "hdff/model.hpp"

namespace hdff {

FittedModel ensemble_descriptor(std::span<const FittedModel> per_model,
                                std::span<const std::uint64_t> seeds) {
  if (per_model.empty()) throw UsageError("ensemble_descriptor: empty model list");
  if (seeds.size() != per_model.size()) {
    throw UsageError("ensemble_descriptor: " + std::to_string(per_model.size()) + " models but " +
                     std::to_string(seeds.size()) + " seeds");
  }
  const auto& first = per_model.front();
  const std::size_t m = first.hd_dim;
  for (std::size_t e = 0; e < per_model.size(); ++e) {
    const auto& model = per_model[e];
    if (model.is_ensemble()) throw UsageError("ensemble_descriptor: member " + std::to_string(e) + " is itself an ensemble");
    if (model.hd_dim != m) {
      throw DimensionError("ensemble_descriptor: member " + std::to_string(e) + " has hd_dim " +
                           std::to_string(model.hd_dim) + ", expected " + std::to_string(m));
    }
    if (model.classes.size() != first.classes.size()) {
      throw UsageError("ensemble_descriptor: member " + std::to_string(e) + " has a different class set");
    }
    for (std::size_t k = 0; k < first.classes.size(); ++k) {
      if (model.classes[k].class_id != first.classes[k].class_id) {
        throw UsageError("ensemble_descriptor: member " + std::to_string(e) + " has a different class set");
      }
    }
  }

  std::vector<HdVector> keys;
  keys.reserve(seeds.size());
  for (auto seed : seeds) keys.push_back(random_rademacher(seed, m));

  FittedModel out;
  out.hd_dim = m;
  out.master_seed = first.master_seed;
  out.pooling = first.pooling;
  out.members.assign(per_model.begin(), per_model.end());
  out.binding_seeds.assign(seeds.begin(), seeds.end());
  for (std::size_t k = 0; k < first.classes.size(); ++k) {
    std::vector<HdVector> bound;
    bound.reserve(per_model.size());
    for (std::size_t e = 0; e < per_model.size(); ++e) {
      bound.push_back(bind(per_model[e].classes[k].descriptor, keys[e]));
    }
    out.classes.push_back({first.classes[k].class_id, bundle(bound)});
  }
  return out;
}

HdVector ensemble_image_descriptor(std::span<const HdVector> per_model_y,
                                   const FittedModel& ensemble) {
  if (!ensemble.is_ensemble()) throw UsageError("ensemble_image_descriptor: model is not an ensemble");
  if (per_model_y.size() != ensemble.binding_seeds.size()) {
    throw UsageError("ensemble_image_descriptor: " + std::to_string(per_model_y.size()) +
                     " member descriptors but " + std::to_string(ensemble.binding_seeds.size()) +
                     " binding seeds");
  }
  std::vector<HdVector> bound;
  bound.reserve(per_model_y.size());
  for (std::size_t e = 0; e < per_model_y.size(); ++e) {
    if (per_model_y[e].dim() != ensemble.hd_dim) {
      throw DimensionError("ensemble_image_descriptor: member " + std::to_string(e) +
                           " descriptor has dim " + std::to_string(per_model_y[e].dim()));
    }
    bound.push_back(bind(per_model_y[e], random_rademacher(ensemble.binding_seeds[e], ensemble.hd_dim)));
  }
  return bundle(bound);
}

}  // namespace hdff
