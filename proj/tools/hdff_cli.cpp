#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hdff/errors.hpp"
#include "hdff/feature_pack.hpp"
#include "hdff/harness/bench.hpp"
#include "hdff/harness/config.hpp"
#include "hdff/harness/experiments.hpp"
#include "hdff/harness/report.hpp"
#include "hdff/harness/synth.hpp"
#include "hdff/model_io.hpp"

namespace fs = std::filesystem;
using namespace hdff;
using namespace hdff::harness;

namespace {

struct Common {
  std::size_t hd_dim = 10000;
  std::uint64_t seed = 0;
  std::string pooling = "max";
  std::string layers;
  std::string det_err_mode = "min";
  double f1_step = 0.1;
  double bins = 1.0;
  unsigned threads = 1;

  ExperimentConfig config() const {
    ExperimentConfig c;
    c.hd_dim = hd_dim;
    c.master_seed = seed;
    c.pooling = parse_pooling(pooling);
    c.layers = parse_int_list(layers);
    c.detection_error_mode = parse_detection_error_mode(det_err_mode);
    c.f1_step = f1_step;
    c.bin_width = bins;
    c.threads = threads;
    return c;
  }
};

void add_model_flags(CLI::App* cmd, Common& o) {
  cmd->add_option("--hd-dim", o.hd_dim, "Hyperspace dimension m");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--pooling", o.pooling, "Spatial pooling: max or avg");
  cmd->add_option("--layers", o.layers, "Comma-separated layer ids (default: all)");
}

void add_eval_flags(CLI::App* cmd, Common& o) {
  cmd->add_option("--det-err-mode", o.det_err_mode, "Detection error convention: min or tpr95");
  cmd->add_option("--f1-step", o.f1_step, "F1 sweep threshold step in degrees");
  cmd->add_option("--bins", o.bins, "Histogram bin width in degrees");
}

void add_threads(CLI::App* cmd, Common& o) {
  cmd->add_option("--threads", o.threads, "Worker threads");
}

/// Opened packs plus the pointer list the experiment API takes.
struct Packs {
  std::vector<std::unique_ptr<FeaturePack>> owned;
  std::vector<const SampleSource*> ptrs;

  explicit Packs(const std::vector<std::string>& dirs) {
    for (const auto& d : dirs) {
      owned.push_back(std::make_unique<FeaturePack>(FeaturePack::open(d)));
      ptrs.push_back(owned.back().get());
    }
  }
  MemberSources sources() const { return ptrs; }
  const SampleSource& one(const char* flag) const {
    if (ptrs.size() != 1) throw UsageError(std::string(flag) + " takes exactly one pack here");
    return *ptrs[0];
  }
};

/// Runs `write` against the file at `path`, or stdout when path is "-".
template <typename Write>
void emit(const std::string& path, Write&& write) {
  if (path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write(os);
  if (!os) throw IoError("write to " + path + " failed");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperdimensional feature fusion out-of-distribution detector"};
  app.require_subcommand(1);
  Common o;

  // fit
  std::vector<std::string> train_dirs;
  std::string model_path;
  auto* fit_cmd = app.add_subcommand("fit", "Fit class descriptors and write a model file");
  fit_cmd->add_option("--train", train_dirs, "Training pack (repeat for an ensemble)")->required();
  fit_cmd->add_option("--out", model_path, "Model file to write")->required();
  add_model_flags(fit_cmd, o);
  add_threads(fit_cmd, o);

  // score
  std::vector<std::string> pack_dirs;
  std::optional<double> theta_star;
  std::string out = "-";
  auto* score_cmd = app.add_subcommand("score", "Score a pack against a model");
  score_cmd->add_option("--pack", pack_dirs, "Pack to score (one per ensemble member)")->required();
  score_cmd->add_option("--model", model_path, "Model file")->required();
  score_cmd->add_option("--theta-star", theta_star, "Decision threshold in degrees");
  score_cmd->add_option("--out", out, "Scores CSV (default stdout)");
  add_threads(score_cmd, o);

  // eval
  std::vector<std::string> id_dirs, ood_dirs;
  std::string out_dir;
  auto* eval_cmd = app.add_subcommand("eval", "Detection metrics for an ID/OOD pack pair");
  eval_cmd->add_option("--id", id_dirs, "In-distribution pack")->required();
  eval_cmd->add_option("--ood", ood_dirs, "Out-of-distribution pack")->required();
  eval_cmd->add_option("--model", model_path, "Model file")->required();
  eval_cmd->add_option("--out-dir", out_dir, "Directory for metrics.json, f1_curve.csv, histogram.csv");
  add_eval_flags(eval_cmd, o);
  add_threads(eval_cmd, o);

  // ablate-layers
  std::string train_dir, id_dir;
  auto* al_cmd = app.add_subcommand("ablate-layers", "Per-layer and fusion metrics");
  al_cmd->add_option("--train", train_dir, "Training pack")->required();
  al_cmd->add_option("--id", id_dir, "In-distribution test pack")->required();
  al_cmd->add_option("--ood", ood_dirs, "OOD pack (repeatable)")->required();
  al_cmd->add_option("--out", out, "Ablation CSV (default stdout)");
  add_model_flags(al_cmd, o);
  add_eval_flags(al_cmd, o);
  add_threads(al_cmd, o);

  // ablate-dims
  std::string dims_text = "100,1000,10000";
  std::size_t repeats = 10;
  auto* ad_cmd = app.add_subcommand("ablate-dims", "AUROC mean and 95% CI per hyperspace size");
  ad_cmd->add_option("--train", train_dir, "Training pack")->required();
  ad_cmd->add_option("--id", id_dir, "In-distribution test pack")->required();
  ad_cmd->add_option("--ood", ood_dirs, "OOD pack")->required();
  ad_cmd->add_option("--dims", dims_text, "Comma-separated dimensions");
  ad_cmd->add_option("--repeats", repeats, "Seeds per dimension (seed, seed+1, ...)");
  ad_cmd->add_option("--out", out, "Ablation CSV (default stdout)");
  add_model_flags(ad_cmd, o);
  add_threads(ad_cmd, o);

  // synth
  SyntheticSpec spec;
  std::string channels_text = "16,32,64,128,256";
  std::string signal_text, shift_text;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic train/test/ood packs");
  synth_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  synth_cmd->add_option("--classes", spec.num_classes, "Number of classes");
  synth_cmd->add_option("--train-per-class", spec.train_per_class, "Training samples per class");
  synth_cmd->add_option("--test-per-class", spec.test_per_class, "Test samples per class");
  synth_cmd->add_option("--ood-samples", spec.ood_samples, "OOD samples (0: classes x test-per-class)");
  synth_cmd->add_option("--channels", channels_text, "Comma-separated channels per layer");
  synth_cmd->add_option("--spatial", spec.spatial, "Height and width of each map");
  synth_cmd->add_option("--prototype-scale", spec.prototype_scale, "Class prototype scale");
  synth_cmd->add_option("--noise-scale", spec.noise_scale, "Noise standard deviation");
  synth_cmd->add_option("--ood-shift", spec.ood_shift, "OOD offset scale");
  synth_cmd->add_option("--layer-signal", signal_text, "Per-layer prototype weights");
  synth_cmd->add_option("--ood-layer-shift", shift_text, "Per-layer OOD offset weights");
  synth_cmd->add_option("--seed", spec.seed, "Generator seed");

  // similarity
  std::string pairs_text;
  auto* sim_cmd = app.add_subcommand("similarity", "Angles between image descriptors");
  sim_cmd->add_option("--pack", pack_dirs, "Pack (one per ensemble member)")->required();
  sim_cmd->add_option("--model", model_path, "Model file")->required();
  sim_cmd->add_option("--pairs", pairs_text, "Sample index pairs, e.g. 0:1,2:5")->required();
  sim_cmd->add_option("--out", out, "Similarity CSV (default stdout)");

  // bench
  BenchConfig bench;
  std::string bench_channels = "64,128,256,512,1024";
  std::string json_path;
  auto* bench_cmd = app.add_subcommand("bench", "Time projection and bundling against channels");
  bench_cmd->add_option("--hd-dim", bench.hd_dim, "Hyperspace dimension m");
  bench_cmd->add_option("--channels", bench_channels, "Comma-separated channel counts");
  bench_cmd->add_option("--repeats", bench.repeats, "Timed reps per channel count");
  bench_cmd->add_option("--batch", bench.batch, "Vectors per rep");
  bench_cmd->add_option("--seed", bench.seed, "Seed");
  bench_cmd->add_option("--out", out, "Timing CSV (default stdout)");
  bench_cmd->add_option("--json", json_path, "Also write a JSON summary here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*fit_cmd) {
      const auto config = o.config();
      const Packs train(train_dirs);
      for (std::size_t e = 0; e < train.ptrs.size(); ++e) {
        std::printf("pack %s:", train_dirs[e].c_str());
        for (const auto& [label, count] : class_counts(*train.ptrs[e])) {
          std::printf(" class %d=%zu", label, count);
        }
        std::printf("\n");
      }
      const auto t0 = std::chrono::steady_clock::now();
      const FittedModel model = fit_model(train.sources(), config);
      const double fit_s = seconds_since(t0);
      save_model(model, model_path);
      std::printf("fitted %zu class descriptor(s), m=%zu, %zu member(s) in %.3f s\n",
                  model.classes.size(), model.hd_dim, std::max<std::size_t>(1, model.members.size()),
                  fit_s);
    } else if (*score_cmd) {
      const Detector detector(load_model(model_path));
      const Packs packs(pack_dirs);
      const auto records = detector.score(packs.sources(), o.threads);
      emit(out, [&](std::ostream& os) { write_scores_csv(os, records, theta_star); });
    } else if (*eval_cmd) {
      const auto config = o.config();
      config.validate(0);
      const Detector detector(load_model(model_path));
      const Packs id(id_dirs), ood(ood_dirs);
      const auto report = evaluate_detector(detector, id.sources(), ood.sources(), config);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        emit((dir / "metrics.json").string(), [&](std::ostream& os) { write_metrics_json(os, report); });
        emit((dir / "f1_curve.csv").string(), [&](std::ostream& os) { write_f1_csv(os, report.f1); });
        emit((dir / "histogram.csv").string(), [&](std::ostream& os) {
          write_histogram_csv(os, report.histogram_id, report.histogram_ood);
        });
      } else {
        write_metrics_json(std::cout, report);
      }
      std::fprintf(stderr, "auroc=%.4f fpr95=%.4f det_err=%.4f max_f1=%.4f\n", report.auroc,
                   report.fpr_at_95_tpr, report.detection_error, report.max_f1);
    } else if (*al_cmd) {
      const auto config = o.config();
      const auto train = FeaturePack::open(train_dir);
      const auto id = FeaturePack::open(id_dir);
      const Packs ood(ood_dirs);
      const auto table = ablate_layers(train, id, ood.ptrs, config);
      emit(out, [&](std::ostream& os) { write_layer_ablation_csv(os, table, ood_dirs); });
    } else if (*ad_cmd) {
      const auto config = o.config();
      const auto dims = parse_size_list(dims_text);
      const auto train = FeaturePack::open(train_dir);
      const auto id = FeaturePack::open(id_dir);
      const Packs ood(ood_dirs);
      const auto rows = ablate_dims(train, id, ood.one("--ood"), dims, repeats, config);
      emit(out, [&](std::ostream& os) { write_dim_ablation_csv(os, rows); });
    } else if (*synth_cmd) {
      spec.channels = parse_size_list(channels_text);
      spec.layer_signal = parse_double_list(signal_text);
      spec.ood_layer_shift = parse_double_list(shift_text);
      const auto packs = generate_synthetic(spec, out_dir);
      std::printf("wrote %s %s %s\n", packs.train.string().c_str(), packs.test.string().c_str(),
                  packs.ood.string().c_str());
    } else if (*sim_cmd) {
      const Detector detector(load_model(model_path));
      const Packs packs(pack_dirs);
      const auto pairs = parse_pairs(pairs_text);
      const auto rows = similarity(detector, packs.sources(), pairs);
      emit(out, [&](std::ostream& os) { write_similarity_csv(os, rows); });
    } else if (*bench_cmd) {
      bench.channels = parse_size_list(bench_channels);
      const auto result = run_bench(bench);
      emit(out, [&](std::ostream& os) { write_bench_csv(os, result); });
      if (!json_path.empty()) emit(json_path, [&](std::ostream& os) { write_bench_json(os, result); });
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
