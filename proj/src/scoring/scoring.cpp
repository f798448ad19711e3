#include "hdff/scoring.hpp"

#include "hdff/errors.hpp"

namespace hdff {

ScoreRecord score(const HdVector& y, std::span<const ClassDescriptor> classes,
                  std::int64_t sample_id) {
  if (classes.empty()) throw UsageError("score: model has no classes");
  if (y.norm() == 0.0) {
    throw DegenerateInputError("score: sample " + std::to_string(sample_id) +
                               " has an all-zero image descriptor");
  }
  ScoreRecord record;
  record.sample_id = sample_id;
  record.per_class_angles.reserve(classes.size());
  bool first = true;
  for (const auto& c : classes) {
    const double angle = angle_degrees(y, c.descriptor);
    record.per_class_angles.push_back(angle);
    if (first || angle < record.theta_degrees ||
        (angle == record.theta_degrees && c.class_id < record.nearest_class)) {
      record.theta_degrees = angle;
      record.nearest_class = c.class_id;
      first = false;
    }
  }
  return record;
}

ScoreRecord score(const HdVector& y, const FittedModel& model, std::int64_t sample_id) {
  if (y.dim() != model.hd_dim) {
    throw DimensionError("score: descriptor dim " + std::to_string(y.dim()) + ", model hd_dim " +
                         std::to_string(model.hd_dim));
  }
  return score(y, model.classes, sample_id);
}

std::string_view to_string(Decision d) {
  return d == Decision::out_of_distribution ? "OOD" : "ID";
}

Decision decide(const ScoreRecord& record, double threshold_degrees) {
  return record.theta_degrees > threshold_degrees ? Decision::out_of_distribution
                                                  : Decision::in_distribution;
}

double pairwise_similarity(const HdVector& y1, const HdVector& y2) {
  return angle_degrees(y1, y2);
}

}  // namespace hdff
