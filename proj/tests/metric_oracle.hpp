#pragma once

// Exhaustive reference implementations for the detection metrics. Slow and
// obvious on purpose: every threshold and every pair is visited directly.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

inline double auroc(const std::vector<double>& id, const std::vector<double>& ood) {
  double wins = 0.0;
  for (double o : ood) {
    for (double i : id) {
      if (o > i) wins += 1.0;
      else if (o == i) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(id.size()) * static_cast<double>(ood.size()));
}

struct Rates {
  std::size_t tp = 0;
  std::size_t fp = 0;
};

/// Observed values plus +inf; the rule is theta >= t.
inline std::vector<double> candidates(const std::vector<double>& id, const std::vector<double>& ood) {
  std::vector<double> t(id);
  t.insert(t.end(), ood.begin(), ood.end());
  t.push_back(std::numeric_limits<double>::infinity());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

inline Rates rates_at(const std::vector<double>& id, const std::vector<double>& ood, double t) {
  Rates r;
  for (double o : ood) r.tp += o >= t ? 1 : 0;
  for (double i : id) r.fp += i >= t ? 1 : 0;
  return r;
}

inline double fpr95_threshold(const std::vector<double>& id, const std::vector<double>& ood) {
  double best = -std::numeric_limits<double>::infinity();
  for (double t : candidates(id, ood)) {
    const Rates r = rates_at(id, ood, t);
    // 0.95 is not exact in binary; compare tp / n >= 19 / 20 in integers.
    if (20 * r.tp >= 19 * ood.size() && t > best) best = t;
  }
  return best;
}

inline double fpr95(const std::vector<double>& id, const std::vector<double>& ood) {
  const Rates r = rates_at(id, ood, fpr95_threshold(id, ood));
  return static_cast<double>(r.fp) / static_cast<double>(id.size());
}

inline double error_at(const std::vector<double>& id, const std::vector<double>& ood, double t) {
  const Rates r = rates_at(id, ood, t);
  const double fpr = static_cast<double>(r.fp) / static_cast<double>(id.size());
  const double fnr = static_cast<double>(ood.size() - r.tp) / static_cast<double>(ood.size());
  return 0.5 * fpr + 0.5 * fnr;
}

inline double detection_error_min(const std::vector<double>& id, const std::vector<double>& ood) {
  double best = 1.0;
  for (double t : candidates(id, ood)) best = std::min(best, error_at(id, ood, t));
  return best;
}

inline double detection_error_tpr95(const std::vector<double>& id, const std::vector<double>& ood) {
  return error_at(id, ood, fpr95_threshold(id, ood));
}

/// F1 with OOD positive under theta > t, at t = k / 10 for k = 0..900.
inline double max_f1(const std::vector<double>& id, const std::vector<double>& ood) {
  double best = 0.0;
  for (int k = 0; k <= 900; ++k) {
    const double t = k / 10.0;
    std::size_t tp = 0, fp = 0;
    for (double o : ood) tp += o > t ? 1 : 0;
    for (double i : id) fp += i > t ? 1 : 0;
    const std::size_t fn = ood.size() - tp;
    const double f1 = tp == 0 ? 0.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    best = std::max(best, f1);
  }
  return best;
}

}  // namespace oracle
