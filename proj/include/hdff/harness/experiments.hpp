#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hdff/harness/config.hpp"
#include "hdff/metrics.hpp"
#include "hdff/model.hpp"
#include "hdff/scoring.hpp"

namespace hdff::harness {

/// Sources of one split, one per ensemble member (a single entry for a plain
/// model). Member e's sample i must be the same input as member 0's.
using MemberSources = std::span<const SampleSource* const>;

/// A fitted model together with its regenerated projections.
class Detector {
 public:
  explicit Detector(FittedModel model);

  /// Takes projections that were already generated, one set per member.
  Detector(FittedModel model, std::vector<ProjectionSet> projections);

  const FittedModel& model() const { return model_; }
  std::size_t member_count() const { return model_.is_ensemble() ? model_.members.size() : 1; }

  /// Image descriptors (y, or y* for ensembles) of every sample.
  std::vector<HdVector> describe(MemberSources sources, unsigned threads = 1) const;

  /// Descriptor of one sample.
  HdVector describe_one(MemberSources sources, std::size_t index) const;

  std::vector<ScoreRecord> score(MemberSources sources, unsigned threads = 1) const;

 private:
  void check_sources(MemberSources sources) const;

  FittedModel model_;
  std::vector<ProjectionSet> projections_;  // one per member
};

/// Seeds used when fitting an ensemble from several feature packs.
std::uint64_t member_seed(std::uint64_t master_seed, std::size_t member);
std::uint64_t binding_seed(std::uint64_t master_seed, std::size_t member);

/// One model per member source, bound into an ensemble when there is more
/// than one. Member e uses member_seed(master, e) for its projections.
Detector fit_detector(MemberSources train, const ExperimentConfig& config);

inline FittedModel fit_model(MemberSources train, const ExperimentConfig& config) {
  return fit_detector(train, config).model();
}

/// Per-class training sample counts.
std::map<int, std::size_t> class_counts(const SampleSource& source);

std::vector<double> thetas(std::span<const ScoreRecord> records);

MetricReport evaluate_detector(const Detector& detector, MemberSources id, MemberSources ood,
                               const ExperimentConfig& config);

struct AblationRow {
  std::optional<int> layer_id;  // nullopt: fusion of all layers
  double auroc = 0.0;
  double fpr_at_95_tpr = 0.0;
  double detection_error = 0.0;
  double max_f1 = 0.0;
};

/// One row per single-layer pipeline, then the all-layer fusion row, for
/// each OOD source. Result is indexed [ood][row].
std::vector<std::vector<AblationRow>> ablate_layers(const SampleSource& train,
                                                    const SampleSource& id,
                                                    std::span<const SampleSource* const> ood,
                                                    const ExperimentConfig& config);

struct DimRow {
  std::size_t hd_dim = 0;
  std::vector<double> aurocs;  // one per repeat, seed = master_seed + r
  double mean = 0.0;
  double ci_half_width = 0.0;  // normal approximation, 1.96 s / sqrt(n)

  double ci_low() const { return mean - ci_half_width; }
  double ci_high() const { return mean + ci_half_width; }
  double ci_width() const { return 2.0 * ci_half_width; }
};

std::vector<DimRow> ablate_dims(const SampleSource& train, const SampleSource& id,
                                const SampleSource& ood, std::span<const std::size_t> dims,
                                std::size_t repeats, const ExperimentConfig& config);

/// Mean and 95% normal-approximation half-width.
std::pair<double, double> mean_and_ci95(std::span<const double> values);

struct SimilarityRow {
  std::size_t sample_a = 0;
  std::size_t sample_b = 0;
  double angle_degrees = 0.0;
};

/// Parses "0:1,2:5" into index pairs.
std::vector<std::pair<std::size_t, std::size_t>> parse_pairs(std::string_view text);

std::vector<SimilarityRow> similarity(const Detector& detector, MemberSources sources,
                                      std::span<const std::pair<std::size_t, std::size_t>> pairs);

}  // namespace hdff::harness
