#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hdff/harness/bench.hpp"
#include "hdff/harness/experiments.hpp"
#include "hdff/metrics.hpp"
#include "hdff/scoring.hpp"

// Output writers. Every CSV opens with a "# hdff-<kind> v1" line; every JSON
// document carries a "schema" field. Column lists live in docs/formats.md.
namespace hdff::harness {

/// Fixed textual form for doubles in data outputs.
std::string format_number(double value);

/// sample_id,theta,nearest_class[,decision]
void write_scores_csv(std::ostream& os, std::span<const ScoreRecord> records,
                      std::optional<double> theta_star = std::nullopt);

void write_metrics_json(std::ostream& os, const MetricReport& report);

/// threshold,f1
void write_f1_csv(std::ostream& os, const F1Sweep& sweep);

/// bin_lo,bin_hi,count_id,count_ood
void write_histogram_csv(std::ostream& os, const Histogram& id, const Histogram& ood);

/// ood_pack,layer,auroc,fpr95,detection_error,max_f1 ("fusion" in the layer
/// column for the all-layer row).
void write_layer_ablation_csv(std::ostream& os, std::span<const std::vector<AblationRow>> table,
                              std::span<const std::string> ood_names);

/// dim,repeats,mean_auroc,ci_low,ci_high,ci_half_width
void write_dim_ablation_csv(std::ostream& os, std::span<const DimRow> rows);

/// sample_a,sample_b,angle
void write_similarity_csv(std::ostream& os, std::span<const SimilarityRow> rows);

/// channels,median_s,min_s,max_s followed by a fit comment line.
void write_bench_csv(std::ostream& os, const BenchResult& result);

void write_bench_json(std::ostream& os, const BenchResult& result);

}  // namespace hdff::harness
