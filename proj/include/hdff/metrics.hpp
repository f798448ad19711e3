#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace hdff {

// OOD samples are the positive class throughout; theta is the OOD score.
//
// AUROC, FPR95 and Detection Error flag a sample as OOD when theta >= t and
// consider every threshold that yields a distinct confusion matrix (midpoints
// between consecutive distinct scores, plus -inf/+inf). The F1 sweep instead
// binarises with the deployment rule theta > t on a fixed grid.

/// P(theta_ood > theta_id) + 0.5 P(tie), via mid-ranks.
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);

/// FPR at the largest threshold whose TPR is at least 95%.
double fpr_at_95_tpr(std::span<const double> id_scores, std::span<const double> ood_scores);

enum class DetectionErrorMode {
  min_over_thresholds,  // min_t 0.5 FPR(t) + 0.5 FNR(t)
  tpr95,                // 0.5 FPR + 0.5 FNR at the FPR95 threshold
};

std::string_view to_string(DetectionErrorMode mode);

/// Accepts "min" or "tpr95".
DetectionErrorMode parse_detection_error_mode(std::string_view text);

double detection_error(std::span<const double> id_scores, std::span<const double> ood_scores,
                       DetectionErrorMode mode = DetectionErrorMode::min_over_thresholds);

struct F1Point {
  double threshold_degrees = 0.0;
  double f1 = 0.0;
};

struct F1Sweep {
  std::vector<F1Point> curve;       // thresholds 0, step, 2 step, ..., 90
  double max_f1 = 0.0;
  double best_threshold = 0.0;      // smallest threshold attaining max_f1
  std::vector<double> near_optimal; // thresholds with f1 >= 0.95 max_f1
};

/// Threshold grid k * step for k = 0, 1, ... up to 90 inclusive.
std::vector<double> threshold_grid(double step_degrees, double upper_degrees = 90.0);

F1Sweep f1_sweep(std::span<const double> id_scores, std::span<const double> ood_scores,
                 double step_degrees = 0.1);

/// Counts over [0, 90] in ceil(90 / width) bins of [lo, hi); the last bin is
/// closed on the right. Out-of-range values are clamped into the edge bins.
struct Histogram {
  double bin_width = 1.0;
  std::vector<std::size_t> counts;

  double bin_lo(std::size_t k) const;
  double bin_hi(std::size_t k) const;
  std::size_t total() const;
};

Histogram angle_histogram(std::span<const double> scores, double bin_width_degrees);

struct MetricReport {
  std::size_t num_id = 0;
  std::size_t num_ood = 0;
  double auroc = 0.0;
  double fpr_at_95_tpr = 0.0;
  double detection_error = 0.0;
  DetectionErrorMode detection_error_mode = DetectionErrorMode::min_over_thresholds;
  double max_f1 = 0.0;
  F1Sweep f1;
  Histogram histogram_id;
  Histogram histogram_ood;
};

struct EvalOptions {
  DetectionErrorMode detection_error_mode = DetectionErrorMode::min_over_thresholds;
  double f1_step = 0.1;
  double bin_width = 1.0;
};

MetricReport evaluate(std::span<const double> id_scores, std::span<const double> ood_scores,
                      const EvalOptions& options = {});

}  // namespace hdff
