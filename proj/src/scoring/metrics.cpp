#include "hdff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hdff/errors.hpp"

namespace hdff {

namespace {

constexpr double kAngleRange = 90.0;

std::vector<double> sorted_checked(std::span<const double> scores, const char* what) {
  if (scores.empty()) throw UsageError(std::string(what) + ": score list is empty");
  std::vector<double> out(scores.begin(), scores.end());
  for (double s : out) {
    if (!std::isfinite(s)) throw UsageError(std::string(what) + ": non-finite score");
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Number of entries >= t in an ascending list.
std::size_t count_at_least(const std::vector<double>& sorted, double t) {
  return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
}

/// Number of entries > t in an ascending list.
std::size_t count_above(const std::vector<double>& sorted, double t) {
  return static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
}

struct Confusion {
  std::size_t tp = 0;  // OOD flagged
  std::size_t fp = 0;  // ID flagged
};

/// One confusion matrix per distinct achievable split under theta >= t,
/// ordered by increasing threshold; the final entry is t = +inf.
std::vector<Confusion> threshold_confusions(const std::vector<double>& id,
                                            const std::vector<double>& ood) {
  std::vector<double> values;
  values.reserve(id.size() + ood.size());
  std::merge(id.begin(), id.end(), ood.begin(), ood.end(), std::back_inserter(values));
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<Confusion> out;
  out.reserve(values.size() + 1);
  for (double t : values) out.push_back({count_at_least(ood, t), count_at_least(id, t)});
  out.push_back({0, 0});
  return out;
}

bool meets_tpr95(std::size_t tp, std::size_t n_ood) { return 20 * tp >= 19 * n_ood; }

double equal_prior_error(const Confusion& c, std::size_t n_id, std::size_t n_ood) {
  const double fpr = static_cast<double>(c.fp) / static_cast<double>(n_id);
  const double fnr = static_cast<double>(n_ood - c.tp) / static_cast<double>(n_ood);
  return 0.5 * fpr + 0.5 * fnr;
}

const Confusion& tpr95_point(const std::vector<Confusion>& confusions, std::size_t n_ood) {
  // TPR is non-increasing along the list; the first entry always qualifies.
  const Confusion* chosen = &confusions.front();
  for (const auto& c : confusions) {
    if (meets_tpr95(c.tp, n_ood)) chosen = &c;
  }
  return *chosen;
}

}  // namespace

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
  const auto id = sorted_checked(id_scores, "auroc");
  const auto ood = sorted_checked(ood_scores, "auroc");

  // Sum of mid-ranks of the OOD scores in the pooled sample.
  double ood_rank_sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t rank = 0;
  while (i < id.size() || j < ood.size()) {
    const double v = (j == ood.size() || (i < id.size() && id[i] < ood[j])) ? id[i] : ood[j];
    std::size_t n_id_tied = 0;
    std::size_t n_ood_tied = 0;
    while (i < id.size() && id[i] == v) ++i, ++n_id_tied;
    while (j < ood.size() && ood[j] == v) ++j, ++n_ood_tied;
    const std::size_t group = n_id_tied + n_ood_tied;
    const double mid_rank = static_cast<double>(2 * rank + group + 1) / 2.0;
    ood_rank_sum += mid_rank * static_cast<double>(n_ood_tied);
    rank += group;
  }
  const double n_id = static_cast<double>(id.size());
  const double n_ood = static_cast<double>(ood.size());
  const double u = ood_rank_sum - n_ood * (n_ood + 1.0) / 2.0;
  return u / (n_id * n_ood);
}

double fpr_at_95_tpr(std::span<const double> id_scores, std::span<const double> ood_scores) {
  const auto id = sorted_checked(id_scores, "fpr_at_95_tpr");
  const auto ood = sorted_checked(ood_scores, "fpr_at_95_tpr");
  const auto confusions = threshold_confusions(id, ood);
  const auto& c = tpr95_point(confusions, ood.size());
  return static_cast<double>(c.fp) / static_cast<double>(id.size());
}

std::string_view to_string(DetectionErrorMode mode) {
  return mode == DetectionErrorMode::tpr95 ? "tpr95" : "min";
}

DetectionErrorMode parse_detection_error_mode(std::string_view text) {
  if (text == "min") return DetectionErrorMode::min_over_thresholds;
  if (text == "tpr95") return DetectionErrorMode::tpr95;
  throw UsageError("unknown detection-error mode '" + std::string(text) +
                   "' (expected min or tpr95)");
}

double detection_error(std::span<const double> id_scores, std::span<const double> ood_scores,
                       DetectionErrorMode mode) {
  const auto id = sorted_checked(id_scores, "detection_error");
  const auto ood = sorted_checked(ood_scores, "detection_error");
  const auto confusions = threshold_confusions(id, ood);
  if (mode == DetectionErrorMode::tpr95) {
    return equal_prior_error(tpr95_point(confusions, ood.size()), id.size(), ood.size());
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : confusions) best = std::min(best, equal_prior_error(c, id.size(), ood.size()));
  return best;
}

std::vector<double> threshold_grid(double step_degrees, double upper_degrees) {
  if (!(step_degrees > 0.0) || !std::isfinite(step_degrees)) {
    throw UsageError("threshold step must be positive, got " + std::to_string(step_degrees));
  }
  const auto last = static_cast<std::size_t>(std::floor(upper_degrees / step_degrees + 1e-9));
  std::vector<double> grid;
  grid.reserve(last + 2);
  for (std::size_t k = 0; k <= last; ++k) {
    // Snap to 1e-9 so k * 0.1 prints as 33.8 rather than 33.800000000000004.
    const double t = std::round(static_cast<double>(k) * step_degrees * 1e9) / 1e9;
    grid.push_back(std::min(t, upper_degrees));
  }
  if (upper_degrees - grid.back() > 1e-9) {
    grid.push_back(upper_degrees);
  } else {
    grid.back() = upper_degrees;
  }
  return grid;
}

F1Sweep f1_sweep(std::span<const double> id_scores, std::span<const double> ood_scores,
                 double step_degrees) {
  const auto grid = threshold_grid(step_degrees, kAngleRange);
  const auto id = sorted_checked(id_scores, "f1_sweep");
  const auto ood = sorted_checked(ood_scores, "f1_sweep");

  F1Sweep sweep;
  sweep.curve.reserve(grid.size());
  for (double t : grid) {
    const std::size_t tp = count_above(ood, t);
    const std::size_t fp = count_above(id, t);
    const std::size_t fn = ood.size() - tp;
    const double f1 = tp == 0 ? 0.0
                              : static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
    sweep.curve.push_back({t, f1});
    if (f1 > sweep.max_f1) {
      sweep.max_f1 = f1;
      sweep.best_threshold = t;
    }
  }
  for (const auto& p : sweep.curve) {
    if (p.f1 >= 0.95 * sweep.max_f1) sweep.near_optimal.push_back(p.threshold_degrees);
  }
  return sweep;
}

double Histogram::bin_lo(std::size_t k) const { return static_cast<double>(k) * bin_width; }

double Histogram::bin_hi(std::size_t k) const {
  return std::min(static_cast<double>(k + 1) * bin_width, kAngleRange);
}

std::size_t Histogram::total() const {
  std::size_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

Histogram angle_histogram(std::span<const double> scores, double bin_width_degrees) {
  if (!(bin_width_degrees > 0.0) || !std::isfinite(bin_width_degrees)) {
    throw UsageError("histogram bin width must be positive");
  }
  const auto bins = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(kAngleRange / bin_width_degrees - 1e-9)));
  Histogram h{bin_width_degrees, std::vector<std::size_t>(bins, 0)};
  for (double s : scores) {
    const double pos = std::floor(s / bin_width_degrees);
    std::size_t k = 0;
    if (pos >= static_cast<double>(bins - 1)) {
      k = bins - 1;
    } else if (pos > 0.0) {
      k = static_cast<std::size_t>(pos);
    }
    ++h.counts[k];
  }
  return h;
}

MetricReport evaluate(std::span<const double> id_scores, std::span<const double> ood_scores,
                      const EvalOptions& options) {
  MetricReport r;
  r.num_id = id_scores.size();
  r.num_ood = ood_scores.size();
  r.auroc = auroc(id_scores, ood_scores);
  r.fpr_at_95_tpr = fpr_at_95_tpr(id_scores, ood_scores);
  r.detection_error_mode = options.detection_error_mode;
  r.detection_error = detection_error(id_scores, ood_scores, options.detection_error_mode);
  r.f1 = f1_sweep(id_scores, ood_scores, options.f1_step);
  r.max_f1 = r.f1.max_f1;
  r.histogram_id = angle_histogram(id_scores, options.bin_width);
  r.histogram_ood = angle_histogram(ood_scores, options.bin_width);
  return r;
}

}  // namespace hdff
