#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hdff/feature_map.hpp"
#include "hdff/hd_vector.hpp"
#include "hdff/projection.hpp"

namespace hdff {

struct ClassDescriptor {
  int class_id = 0;
  HdVector descriptor;

  friend bool operator==(const ClassDescriptor&, const ClassDescriptor&) = default;
};

/// Everything needed to score new samples: preprocessing state, the seed that
/// rebuilds the projections, and one raw (unnormalised) bundle per class.
///
/// An ensemble model has a non-empty `members` list, one binding seed per
/// member, and no layers of its own. Its `classes` hold the ensemble
/// descriptors bundle_e(d_c^(e) (x) z^(e)); each member keeps its own d_c^(e).
struct FittedModel {
  std::size_t hd_dim = 0;
  std::uint64_t master_seed = 0;
  PoolingMode pooling = PoolingMode::max;
  std::vector<LayerStats> layers;
  std::vector<ClassDescriptor> classes;  // ascending class_id
  std::vector<FittedModel> members;
  std::vector<std::uint64_t> binding_seeds;

  bool is_ensemble() const { return !members.empty(); }

  std::vector<LayerShape> layer_shapes() const;

  /// Checks the structural invariants; throws FitError naming the problem.
  void validate() const;

  friend bool operator==(const FittedModel&, const FittedModel&) = default;
};

/// Rebuilds the projections a (non-ensemble) model was fitted with.
ProjectionSet projections_for(const FittedModel& model);

/// y = bundle_l P_l (pool(m_l) - mean_l) over the model's layers. Maps for
/// layers the model does not use are ignored.
HdVector image_descriptor(std::span<const LayerFeatureMap> maps, const FittedModel& model,
                          const ProjectionSet& projections);

/// Same, from already pooled and centred vectors in model layer order.
HdVector descriptor_from_centered(std::span<const PooledVector> centered,
                                  const ProjectionSet& projections);

/// Random-access labelled sample stream (a feature pack or an in-memory set).
class SampleSource {
 public:
  virtual ~SampleSource() = default;

  virtual std::size_t size() const = 0;
  virtual std::vector<LayerShape> layers() const = 0;
  virtual bool has_labels() const = 0;
  virtual int label(std::size_t index) const = 0;
  virtual std::int64_t sample_id(std::size_t index) const { return static_cast<std::int64_t>(index); }

  /// Class set the data claims to cover; empty when unspecified.
  virtual std::vector<int> declared_classes() const { return {}; }

  /// Maps of sample `index` for the requested layers, in request order.
  virtual std::vector<LayerFeatureMap> read(std::size_t index,
                                            std::span<const int> layer_ids) const = 0;
};

/// Samples held in memory; handy for tests and small experiments.
class InMemorySource : public SampleSource {
 public:
  struct Sample {
    std::vector<LayerFeatureMap> maps;
    int label = 0;
  };

  explicit InMemorySource(std::vector<Sample> samples, bool labelled = true);

  std::size_t size() const override { return samples_.size(); }
  std::vector<LayerShape> layers() const override;
  bool has_labels() const override { return labelled_; }
  int label(std::size_t index) const override { return samples_.at(index).label; }
  std::vector<LayerFeatureMap> read(std::size_t index,
                                    std::span<const int> layer_ids) const override;

 private:
  std::vector<Sample> samples_;
  bool labelled_;
};

struct FitConfig {
  std::size_t hd_dim = 10000;
  std::uint64_t master_seed = 0;
  PoolingMode pooling = PoolingMode::max;
  std::vector<int> layers;            // empty: every layer in the source
  std::vector<int> declared_classes;  // empty: the source's declaration, else the labels seen
  unsigned threads = 1;
};

/// Layers a config selects from a source, in source order. Throws UsageError
/// for unknown layer ids.
std::vector<LayerShape> select_layers(const SampleSource& source, const FitConfig& config);

/// Two passes over the source: per-layer pooled means, then class bundles of
/// the image descriptors.
FittedModel fit(const SampleSource& source, const FitConfig& config);

/// As above with projections already generated for the selected layers.
FittedModel fit(const SampleSource& source, const FitConfig& config,
                const ProjectionSet& projections);

/// Image descriptors of every sample, in source order.
std::vector<HdVector> describe(const SampleSource& source, const FittedModel& model,
                               const ProjectionSet& projections, unsigned threads = 1);

/// Ensemble class descriptors: d*_c = bundle_e (d_c^(e) (x) z^(e)) with
/// z^(e) = random_rademacher(seeds[e], m).
FittedModel ensemble_descriptor(std::span<const FittedModel> per_model,
                                std::span<const std::uint64_t> seeds);

/// y* = bundle_e (y^(e) (x) z^(e)) using the model's stored binding seeds.
HdVector ensemble_image_descriptor(std::span<const HdVector> per_model_y,
                                   const FittedModel& ensemble);

}  // namespace hdff
