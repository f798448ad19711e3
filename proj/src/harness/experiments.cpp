#include "hdff/harness/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "hdff/errors.hpp"
#include "hdff/parallel.hpp"
#include "hdff/rng.hpp"

namespace hdff::harness {

namespace {

constexpr std::uint64_t kBindingStream = 0xb1d;

std::vector<ProjectionSet> regenerate(const FittedModel& model) {
  std::vector<ProjectionSet> out;
  if (model.is_ensemble()) {
    for (const auto& member : model.members) out.push_back(projections_for(member));
  } else {
    out.push_back(projections_for(model));
  }
  return out;
}

std::size_t widest(std::span<const LayerShape> layers) {
  std::size_t c = 0;
  for (const auto& l : layers) c = std::max(c, l.channels);
  return c;
}

}  // namespace

Detector::Detector(FittedModel model) : Detector(model, regenerate(model)) {}

Detector::Detector(FittedModel model, std::vector<ProjectionSet> projections)
    : model_(std::move(model)), projections_(std::move(projections)) {
  model_.validate();
  if (projections_.size() != member_count()) {
    throw UsageError("detector: " + std::to_string(projections_.size()) +
                     " projection sets for " + std::to_string(member_count()) + " member(s)");
  }
}

void Detector::check_sources(MemberSources sources) const {
  if (sources.size() != member_count()) {
    throw UsageError("model has " + std::to_string(member_count()) + " member(s) but " +
                     std::to_string(sources.size()) + " feature pack(s) were given");
  }
  for (const auto* s : sources) {
    if (s->size() != sources[0]->size()) {
      throw UsageError("ensemble feature packs disagree on the sample count (" +
                       std::to_string(s->size()) + " vs " + std::to_string(sources[0]->size()) +
                       ")");
    }
  }
}

std::vector<HdVector> Detector::describe(MemberSources sources, unsigned threads) const {
  check_sources(sources);
  if (!model_.is_ensemble()) return hdff::describe(*sources[0], model_, projections_[0], threads);

  const std::size_t n = sources[0]->size();
  std::vector<std::vector<HdVector>> per_member;
  for (std::size_t e = 0; e < model_.members.size(); ++e) {
    per_member.push_back(hdff::describe(*sources[e], model_.members[e], projections_[e], threads));
  }
  std::vector<HdVector> out(n);
  parallel_for(chunk_count(n), threads, [&](std::size_t chunk) {
    std::vector<HdVector> ys(per_member.size());
    const std::size_t end = std::min(n, (chunk + 1) * kChunkSize);
    for (std::size_t i = chunk * kChunkSize; i < end; ++i) {
      for (std::size_t e = 0; e < per_member.size(); ++e) ys[e] = per_member[e][i];
      out[i] = ensemble_image_descriptor(ys, model_);
    }
  });
  return out;
}

HdVector Detector::describe_one(MemberSources sources, std::size_t index) const {
  check_sources(sources);
  if (index >= sources[0]->size()) {
    throw UsageError("sample index " + std::to_string(index) + " is out of range (" +
                     std::to_string(sources[0]->size()) + " samples)");
  }
  auto one = [&](const FittedModel& m, const ProjectionSet& p, const SampleSource& s) {
    std::vector<int> ids;
    for (const auto& l : m.layers) ids.push_back(l.layer_id);
    const auto maps = s.read(index, ids);
    return image_descriptor(maps, m, p);
  };
  if (!model_.is_ensemble()) return one(model_, projections_[0], *sources[0]);
  std::vector<HdVector> ys;
  for (std::size_t e = 0; e < model_.members.size(); ++e) {
    ys.push_back(one(model_.members[e], projections_[e], *sources[e]));
  }
  return ensemble_image_descriptor(ys, model_);
}

std::vector<ScoreRecord> Detector::score(MemberSources sources, unsigned threads) const {
  const auto ys = describe(sources, threads);
  std::vector<ScoreRecord> out(ys.size());
  parallel_for(chunk_count(ys.size()), threads, [&](std::size_t chunk) {
    const std::size_t end = std::min(ys.size(), (chunk + 1) * kChunkSize);
    for (std::size_t i = chunk * kChunkSize; i < end; ++i) {
      out[i] = hdff::score(ys[i], model_, sources[0]->sample_id(i));
    }
  });
  return out;
}

std::uint64_t member_seed(std::uint64_t master_seed, std::size_t member) {
  return master_seed + member;
}

std::uint64_t binding_seed(std::uint64_t master_seed, std::size_t member) {
  return derive_seed(derive_seed(master_seed, kBindingStream), member);
}

Detector fit_detector(MemberSources train, const ExperimentConfig& config) {
  if (train.empty()) throw UsageError("no training feature pack given");
  std::vector<FittedModel> models;
  std::vector<ProjectionSet> projections;
  for (std::size_t e = 0; e < train.size(); ++e) {
    FitConfig fc = config.fit_config();
    fc.master_seed = member_seed(config.master_seed, e);
    const auto layers = select_layers(*train[e], fc);
    config.validate(widest(layers));
    auto p = ProjectionSet::generate(fc.master_seed, fc.hd_dim, layers);
    models.push_back(fit(*train[e], fc, p));
    projections.push_back(std::move(p));
  }
  if (models.size() == 1) return Detector(std::move(models[0]), std::move(projections));

  std::vector<std::uint64_t> seeds;
  for (std::size_t e = 0; e < models.size(); ++e) seeds.push_back(binding_seed(config.master_seed, e));
  FittedModel ensemble = ensemble_descriptor(models, seeds);
  ensemble.master_seed = config.master_seed;
  return Detector(std::move(ensemble), std::move(projections));
}

std::map<int, std::size_t> class_counts(const SampleSource& source) {
  std::map<int, std::size_t> counts;
  if (!source.has_labels()) return counts;
  for (std::size_t i = 0; i < source.size(); ++i) ++counts[source.label(i)];
  return counts;
}

std::vector<double> thetas(std::span<const ScoreRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.theta_degrees);
  return out;
}

MetricReport evaluate_detector(const Detector& detector, MemberSources id, MemberSources ood,
                               const ExperimentConfig& config) {
  const auto id_theta = thetas(detector.score(id, config.threads));
  const auto ood_theta = thetas(detector.score(ood, config.threads));
  return evaluate(id_theta, ood_theta, config.eval_options());
}

std::vector<std::vector<AblationRow>> ablate_layers(const SampleSource& train,
                                                    const SampleSource& id,
                                                    std::span<const SampleSource* const> ood,
                                                    const ExperimentConfig& config) {
  if (ood.empty()) throw UsageError("layer ablation needs at least one OOD feature pack");
  const auto layers = select_layers(train, config.fit_config());

  std::vector<std::vector<AblationRow>> out(ood.size());
  auto run = [&](const ExperimentConfig& cfg, std::optional<int> layer) {
    const SampleSource* train_ptr = &train;
    const SampleSource* id_ptr = &id;
    const Detector detector = fit_detector({&train_ptr, 1}, cfg);
    const auto id_theta = thetas(detector.score({&id_ptr, 1}, cfg.threads));
    for (std::size_t o = 0; o < ood.size(); ++o) {
      const auto ood_theta = thetas(detector.score({&ood[o], 1}, cfg.threads));
      const auto report = evaluate(id_theta, ood_theta, cfg.eval_options());
      out[o].push_back({layer, report.auroc, report.fpr_at_95_tpr, report.detection_error,
                        report.max_f1});
    }
  };

  for (const auto& shape : layers) {
    ExperimentConfig single = config;
    single.layers = {shape.layer_id};
    run(single, shape.layer_id);
  }
  run(config, std::nullopt);
  return out;
}

std::pair<double, double> mean_and_ci95(std::span<const double> values) {
  if (values.empty()) throw UsageError("mean of an empty list");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

std::vector<DimRow> ablate_dims(const SampleSource& train, const SampleSource& id,
                                const SampleSource& ood, std::span<const std::size_t> dims,
                                std::size_t repeats, const ExperimentConfig& config) {
  if (dims.empty()) throw UsageError("dimension ablation needs at least one dimension");
  if (repeats == 0) throw UsageError("--repeats must be at least 1");
  const SampleSource* train_ptr = &train;
  const SampleSource* id_ptr = &id;
  const SampleSource* ood_ptr = &ood;

  std::vector<DimRow> rows;
  for (std::size_t dim : dims) {
    DimRow row;
    row.hd_dim = dim;
    for (std::size_t r = 0; r < repeats; ++r) {
      ExperimentConfig cfg = config;
      cfg.hd_dim = dim;
      cfg.master_seed = config.master_seed + r;
      const Detector detector = fit_detector({&train_ptr, 1}, cfg);
      const auto id_theta = thetas(detector.score({&id_ptr, 1}, cfg.threads));
      const auto ood_theta = thetas(detector.score({&ood_ptr, 1}, cfg.threads));
      row.aurocs.push_back(auroc(id_theta, ood_theta));
    }
    std::tie(row.mean, row.ci_half_width) = mean_and_ci95(row.aurocs);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_pairs(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  auto number = [&](std::string_view item) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError("cannot parse pair list '" + std::string(text) + "'; expected a:b,c:d");
    }
    return v;
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, end - start);
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw UsageError("cannot parse pair list '" + std::string(text) + "'; expected a:b,c:d");
    }
    out.emplace_back(number(item.substr(0, colon)), number(item.substr(colon + 1)));
    start = end + 1;
  }
  return out;
}

std::vector<SimilarityRow> similarity(const Detector& detector, MemberSources sources,
                                      std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::map<std::size_t, HdVector> cache;
  auto get = [&](std::size_t i) -> const HdVector& {
    auto it = cache.find(i);
    if (it == cache.end()) it = cache.emplace(i, detector.describe_one(sources, i)).first;
    return it->second;
  };
  std::vector<SimilarityRow> out;
  for (const auto& [a, b] : pairs) {
    out.push_back({a, b, pairwise_similarity(get(a), get(b))});
  }
  return out;
}

}  // namespace hdff::harness
