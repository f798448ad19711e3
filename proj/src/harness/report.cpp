#include "hdff/harness/report.hpp"

#include <cstdio>

#include "json.hpp"

namespace hdff::harness {

namespace {

using nlohmann::ordered_json;

ordered_json histogram_json(const Histogram& h) {
  return {{"bin_width", h.bin_width}, {"counts", h.counts}};
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_scores_csv(std::ostream& os, std::span<const ScoreRecord> records,
                      std::optional<double> theta_star) {
  os << "# hdff-scores v1\n";
  os << "sample_id,theta,nearest_class" << (theta_star ? ",decision" : "") << '\n';
  for (const auto& r : records) {
    os << r.sample_id << ',' << format_number(r.theta_degrees) << ',' << r.nearest_class;
    if (theta_star) os << ',' << to_string(decide(r, *theta_star));
    os << '\n';
  }
}

void write_metrics_json(std::ostream& os, const MetricReport& report) {
  ordered_json curve = ordered_json::array();
  for (const auto& p : report.f1.curve) curve.push_back({p.threshold_degrees, p.f1});
  ordered_json doc = {
      {"schema", "hdff.metrics.v1"},
      {"num_id", report.num_id},
      {"num_ood", report.num_ood},
      {"auroc", report.auroc},
      {"fpr_at_95_tpr", report.fpr_at_95_tpr},
      {"detection_error", report.detection_error},
      {"detection_error_mode", std::string(to_string(report.detection_error_mode))},
      {"max_f1", report.max_f1},
      {"best_threshold", report.f1.best_threshold},
      {"near_optimal_thresholds", report.f1.near_optimal},
      {"f1_curve", curve},
      {"histogram_id", histogram_json(report.histogram_id)},
      {"histogram_ood", histogram_json(report.histogram_ood)},
  };
  os << doc.dump(2) << '\n';
}

void write_f1_csv(std::ostream& os, const F1Sweep& sweep) {
  os << "# hdff-f1 v1\nthreshold,f1\n";
  for (const auto& p : sweep.curve) {
    os << format_number(p.threshold_degrees) << ',' << format_number(p.f1) << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const Histogram& id, const Histogram& ood) {
  os << "# hdff-histogram v1\nbin_lo,bin_hi,count_id,count_ood\n";
  for (std::size_t k = 0; k < id.counts.size(); ++k) {
    os << format_number(id.bin_lo(k)) << ',' << format_number(id.bin_hi(k)) << ','
       << id.counts[k] << ',' << (k < ood.counts.size() ? ood.counts[k] : 0) << '\n';
  }
}

void write_layer_ablation_csv(std::ostream& os, std::span<const std::vector<AblationRow>> table,
                              std::span<const std::string> ood_names) {
  os << "# hdff-layer-ablation v1\nood_pack,layer,auroc,fpr95,detection_error,max_f1\n";
  for (std::size_t o = 0; o < table.size(); ++o) {
    const std::string name = o < ood_names.size() ? ood_names[o] : std::to_string(o);
    for (const auto& row : table[o]) {
      os << name << ',' << (row.layer_id ? std::to_string(*row.layer_id) : "fusion") << ','
         << format_number(row.auroc) << ',' << format_number(row.fpr_at_95_tpr) << ','
         << format_number(row.detection_error) << ',' << format_number(row.max_f1) << '\n';
    }
  }
}

void write_dim_ablation_csv(std::ostream& os, std::span<const DimRow> rows) {
  os << "# hdff-dim-ablation v1\ndim,repeats,mean_auroc,ci_low,ci_high,ci_half_width\n";
  for (const auto& r : rows) {
    os << r.hd_dim << ',' << r.aurocs.size() << ',' << format_number(r.mean) << ','
       << format_number(r.ci_low()) << ',' << format_number(r.ci_high()) << ','
       << format_number(r.ci_half_width) << '\n';
  }
}

void write_similarity_csv(std::ostream& os, std::span<const SimilarityRow> rows) {
  os << "# hdff-similarity v1\nsample_a,sample_b,angle\n";
  for (const auto& r : rows) {
    os << r.sample_a << ',' << r.sample_b << ',' << format_number(r.angle_degrees) << '\n';
  }
}

void write_bench_csv(std::ostream& os, const BenchResult& result) {
  os << "# hdff-bench v1\nchannels,median_s,min_s,max_s\n";
  for (const auto& r : result.rows) {
    os << r.channels << ',' << format_number(r.median_seconds) << ','
       << format_number(r.min_seconds) << ',' << format_number(r.max_seconds) << '\n';
  }
  os << "# slope_s_per_channel=" << format_number(result.fit.slope)
     << " intercept_s=" << format_number(result.fit.intercept)
     << " r_squared=" << format_number(result.fit.r_squared) << '\n';
}

void write_bench_json(std::ostream& os, const BenchResult& result) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"channels", r.channels},
                    {"median_s", r.median_seconds},
                    {"min_s", r.min_seconds},
                    {"max_s", r.max_seconds}});
  }
  ordered_json doc = {
      {"schema", "hdff.bench.v1"},
      {"hd_dim", result.config.hd_dim},
      {"repeats", result.config.repeats},
      {"batch", result.config.batch},
      {"rows", rows},
      {"slope_s_per_channel", result.fit.slope},
      {"intercept_s", result.fit.intercept},
      {"r_squared", result.fit.r_squared},
  };
  os << doc.dump(2) << '\n';
}

}  // namespace hdff::harness
