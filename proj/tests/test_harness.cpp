#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "hdff/errors.hpp"
#include "hdff/feature_pack.hpp"
#include "hdff/harness/bench.hpp"
#include "hdff/harness/config.hpp"
#include "hdff/harness/experiments.hpp"
#include "hdff/harness/report.hpp"
#include "hdff/harness/synth.hpp"
#include "hdff/model_io.hpp"
#include "test_support.hpp"

using namespace hdff;
using namespace hdff::harness;
using testing_support::fresh_dir;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.num_classes = 3;
  s.train_per_class = 30;
  s.test_per_class = 20;
  s.channels = {4, 6, 8};
  s.spatial = 2;
  s.seed = 5;
  return s;
}

struct Opened {
  FeaturePack train, test, ood;
};

Opened open_all(const SyntheticPacks& p) {
  return {FeaturePack::open(p.train), FeaturePack::open(p.test), FeaturePack::open(p.ood)};
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.hd_dim = 256;
  c.master_seed = 3;
  return c;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("config: list parsing") {
  CHECK(parse_int_list("3,5,-7") == std::vector<int>{3, 5, -7});
  CHECK(parse_int_list("").empty());
  CHECK(parse_size_list("10,100") == std::vector<std::size_t>{10, 100});
  CHECK(parse_double_list("0.5,2") == std::vector<double>{0.5, 2.0});
  CHECK_THROWS_AS(parse_int_list("1,,2"), UsageError);
  CHECK_THROWS_AS(parse_int_list("1,x"), UsageError);
  CHECK_THROWS_AS(parse_size_list("-1"), UsageError);
}

TEST_CASE("config: validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate(256));
  c.hd_dim = 8;
  CHECK_THROWS_AS(c.validate(16), UsageError);
  c.hd_dim = 0;
  CHECK_THROWS_AS(c.validate(0), UsageError);
  c = {};
  c.f1_step = 0.0;
  CHECK_THROWS_AS(c.validate(1), UsageError);
  c = {};
  c.threads = 0;
  CHECK_THROWS_AS(c.validate(1), UsageError);
}

TEST_CASE("synth: packs validate and carry the spec's shapes") {
  const auto spec = small_spec();
  const auto p = generate_synthetic(spec, fresh_dir("synth_shape"));
  auto o = open_all(p);
  CHECK(o.train.size() == 90);
  CHECK(o.test.size() == 60);
  CHECK(o.ood.size() == 60);
  CHECK_FALSE(o.ood.has_labels());
  CHECK(o.train.declared_classes() == std::vector<int>{0, 1, 2});
  CHECK(o.train.layers() == std::vector<LayerShape>{{0, 4}, {1, 6}, {2, 8}});
  CHECK(class_counts(o.train) == std::map<int, std::size_t>{{0, 30}, {1, 30}, {2, 30}});
}

TEST_CASE("synth: spec validation") {
  auto s = small_spec();
  s.num_classes = 0;
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = small_spec();
  s.noise_scale = -1.0;
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = small_spec();
  s.layer_signal = {1.0};
  CHECK_THROWS_AS(s.validate(), UsageError);
}

TEST_CASE("synth: zero noise makes a class's samples identical but still fittable") {
  auto spec = small_spec();
  spec.noise_scale = 0.0;
  const auto p = generate_synthetic(spec, fresh_dir("synth_noiseless"));
  const auto train = FeaturePack::open(p.train);
  const std::vector<int> ids{0, 1, 2};
  const auto a = train.read(0, ids), b = train.read(3, ids);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(std::vector<float>(a[l].values().begin(), a[l].values().end()) ==
          std::vector<float>(b[l].values().begin(), b[l].values().end()));
  }
  const SampleSource* src = &train;
  CHECK_NOTHROW(fit_model({&src, 1}, small_config()));

  spec.train_per_class = 1;
  spec.num_classes = 1;
  const auto single = generate_synthetic(spec, fresh_dir("synth_single"));
  const auto one = FeaturePack::open(single.train);
  const SampleSource* one_src = &one;
  CHECK_THROWS_AS(fit_model({&one_src, 1}, small_config()), FitError);
}

TEST_CASE("fit: refit is byte-identical; a new seed keeps nearest classes") {
  const auto p = generate_synthetic(small_spec(), fresh_dir("synth_fit"));
  auto o = open_all(p);
  const SampleSource* train = &o.train;
  auto cfg = small_config();
  const auto a = fit_model({&train, 1}, cfg);
  CHECK(serialize_model(a) == serialize_model(fit_model({&train, 1}, cfg)));
  for (std::size_t i = 0; i < a.classes.size(); ++i) {
    for (std::size_t j = i + 1; j < a.classes.size(); ++j) {
      CHECK(angle_degrees(a.classes[i].descriptor, a.classes[j].descriptor) > 0.0);
    }
  }
  cfg.master_seed = 99;
  const auto b = fit_model({&train, 1}, cfg);
  CHECK(serialize_model(a) != serialize_model(b));
  const auto ra = Detector(a).score({&train, 1});
  const auto rb = Detector(b).score({&train, 1});
  std::size_t same = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) same += ra[i].nearest_class == rb[i].nearest_class;
  CHECK(same >= 0.95 * ra.size());
}

TEST_CASE("score: training data scores lower than shifted OOD; theta* extremes") {
  const auto p = generate_synthetic(small_spec(), fresh_dir("synth_score"));
  auto o = open_all(p);
  const SampleSource* train = &o.train;
  const SampleSource* ood = &o.ood;
  const Detector det(fit_model({&train, 1}, small_config()));
  const auto rt = det.score({&train, 1});
  const auto ro = det.score({&ood, 1}, 2);
  CHECK(mean(thetas(rt)) < mean(thetas(ro)));
  for (const auto& r : ro) {
    CHECK(r.theta_degrees <= 90.0);
    CHECK(decide(r, 90.0) == Decision::in_distribution);
    CHECK(decide(r, -1.0) == Decision::out_of_distribution);
  }
  std::ostringstream csv;
  write_scores_csv(csv, rt, 30.0);
  CHECK(csv.str().rfind("# hdff-scores v1\nsample_id,theta,nearest_class,decision\n", 0) == 0);
}

TEST_CASE("score: layer mismatch between pack and model is an error") {
  const auto p = generate_synthetic(small_spec(), fresh_dir("synth_mismatch"));
  auto spec = small_spec();
  spec.channels = {4, 6, 9};
  const auto q = generate_synthetic(spec, fresh_dir("synth_mismatch_b"));
  auto o = open_all(p);
  const auto other = FeaturePack::open(q.test);
  const SampleSource* train = &o.train;
  const SampleSource* bad = &other;
  const Detector det(fit_model({&train, 1}, small_config()));
  CHECK_THROWS_WITH_AS(det.score({&bad, 1}), doctest::Contains("layer 2"), DimensionError);
}

TEST_CASE("eval: identical packs give AUROC exactly one half; swap complements") {
  const auto p = generate_synthetic(small_spec(), fresh_dir("synth_eval"));
  auto o = open_all(p);
  const SampleSource* train = &o.train;
  const SampleSource* test = &o.test;
  const SampleSource* ood = &o.ood;
  const auto cfg = small_config();
  const Detector det(fit_model({&train, 1}, cfg));
  CHECK(evaluate_detector(det, {&test, 1}, {&test, 1}, cfg).auroc == 0.5);
  const auto fwd = evaluate_detector(det, {&test, 1}, {&ood, 1}, cfg);
  const auto back = evaluate_detector(det, {&ood, 1}, {&test, 1}, cfg);
  CHECK(fwd.auroc + back.auroc == doctest::Approx(1.0).epsilon(1e-12));

  std::ostringstream json;
  write_metrics_json(json, fwd);
  CHECK(json.str().find("\"schema\": \"hdff.metrics.v1\"") != std::string::npos);
}

TEST_CASE("ensemble: two member packs fit, score and round-trip") {
  const auto p = generate_synthetic(small_spec(), fresh_dir("synth_ens"));
  auto o = open_all(p);
  const SampleSource* train[] = {&o.train, &o.train};
  const SampleSource* test[] = {&o.test, &o.test};
  const auto cfg = small_config();
  const auto det = fit_detector(train, cfg);
  CHECK(det.model().is_ensemble());
  CHECK(det.member_count() == 2);
  const Detector reloaded(deserialize_model(serialize_model(det.model())));
  const auto a = det.score(test), b = reloaded.score(test);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].theta_degrees == b[i].theta_degrees);
  const SampleSource* one[] = {&o.test};
  CHECK_THROWS_AS(det.score(one), UsageError);
}

TEST_CASE("ablate-layers: a single-layer pack's layer row equals the fusion row") {
  auto spec = small_spec();
  spec.channels = {8};
  const auto p = generate_synthetic(spec, fresh_dir("synth_single_layer"));
  auto o = open_all(p);
  const SampleSource* ood[] = {&o.ood};
  const auto table = ablate_layers(o.train, o.test, ood, small_config());
  REQUIRE(table.size() == 1);
  REQUIRE(table[0].size() == 2);
  CHECK(table[0][0].layer_id == 0);
  CHECK_FALSE(table[0][1].layer_id.has_value());
  CHECK(table[0][0].auroc == table[0][1].auroc);
  CHECK(table[0][0].fpr_at_95_tpr == table[0][1].fpr_at_95_tpr);
  CHECK(table[0][0].detection_error == table[0][1].detection_error);
  CHECK(table[0][0].max_f1 == table[0][1].max_f1);
}

TEST_CASE("ablate-layers: the signal-carrying layer wins") {
  auto spec = small_spec();
  spec.channels = {8, 8, 8, 8};
  spec.layer_signal = {0.1, 0.1, 0.1, 2.0};
  spec.ood_layer_shift = {0.1, 0.1, 0.1, 2.0};
  const auto p = generate_synthetic(spec, fresh_dir("synth_layer3"));
  auto o = open_all(p);
  const SampleSource* ood[] = {&o.ood};
  const auto rows = ablate_layers(o.train, o.test, ood, small_config())[0];
  REQUIRE(rows.size() == 5);
  for (int l = 0; l < 3; ++l) CHECK(rows[3].auroc > rows[l].auroc);
  std::ostringstream csv;
  const std::vector<std::string> names{"ood"};
  write_layer_ablation_csv(csv, std::vector<std::vector<AblationRow>>{rows}, names);
  CHECK(csv.str().find("ood,fusion,") != std::string::npos);
}

TEST_CASE("ablate-dims: one repeat matches eval; repeat tables are deterministic") {
  auto spec = small_spec();
  const auto p = generate_synthetic(spec, fresh_dir("synth_dims"));
  auto o = open_all(p);
  const SampleSource* train = &o.train;
  const SampleSource* test = &o.test;
  const SampleSource* ood = &o.ood;
  const auto cfg = small_config();
  const std::vector<std::size_t> one_dim{cfg.hd_dim};
  const auto rows = ablate_dims(o.train, o.test, o.ood, one_dim, 1, cfg);
  REQUIRE(rows.size() == 1);
  const Detector det(fit_model({&train, 1}, cfg));
  CHECK(rows[0].mean == evaluate_detector(det, {&test, 1}, {&ood, 1}, cfg).auroc);
  CHECK(rows[0].ci_half_width == 0.0);

  const std::vector<std::size_t> dims{8, 64};
  std::ostringstream a, b;
  write_dim_ablation_csv(a, ablate_dims(o.train, o.test, o.ood, dims, 10, cfg));
  write_dim_ablation_csv(b, ablate_dims(o.train, o.test, o.ood, dims, 10, cfg));
  CHECK(a.str() == b.str());

  const std::vector<std::size_t> too_small{4};
  CHECK_THROWS_AS(ablate_dims(o.train, o.test, o.ood, too_small, 1, cfg), UsageError);
}

TEST_CASE("mean_and_ci95") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto [m, h] = mean_and_ci95(v);
  CHECK(m == 2.5);
  // s = sqrt(5/3), half width = 1.96 s / 2.
  CHECK(h == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-14));
  CHECK(mean_and_ci95(std::vector<double>{7.0}).second == 0.0);
}

TEST_CASE("similarity: self, duplicates and direct recomputation") {
  auto spec = small_spec();
  spec.noise_scale = 0.0;
  const auto p = generate_synthetic(spec, fresh_dir("synth_sim"));
  auto o = open_all(p);
  const SampleSource* train = &o.train;
  const SampleSource* test = &o.test;
  const Detector det(fit_model({&train, 1}, small_config()));
  // Noise-free: samples 0 and 3 share class 0 and have identical content.
  const auto pairs = parse_pairs("0:0,0:3,1:5");
  const auto rows = similarity(det, {&test, 1}, pairs);
  CHECK(rows[0].angle_degrees == 0.0);
  CHECK(rows[1].angle_degrees == 0.0);
  const auto ys = det.describe({&test, 1});
  CHECK(rows[2].angle_degrees == pairwise_similarity(ys[1], ys[5]));
  CHECK_THROWS_AS(similarity(det, {&test, 1}, parse_pairs("0:600")), UsageError);
  CHECK_THROWS_AS(parse_pairs("0-1"), UsageError);
}

TEST_CASE("bench: linear fit helper and output") {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));

  BenchConfig cfg;
  cfg.hd_dim = 256;
  cfg.channels = {8, 16, 32};
  cfg.repeats = 3;
  const auto r = run_bench(cfg);
  CHECK(r.rows.size() == 3);
  std::ostringstream csv;
  write_bench_csv(csv, r);
  CHECK(csv.str().rfind("# hdff-bench v1\nchannels,median_s,min_s,max_s\n", 0) == 0);
}

TEST_CASE("report: fixed-form numbers") {
  CHECK(format_number(0.75) == "0.75");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
}
