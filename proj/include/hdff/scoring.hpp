#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hdff/hd_vector.hpp"
#include "hdff/model.hpp"

namespace hdff {

/// theta is the smallest angle (degrees) from the image descriptor to any
/// class descriptor; nearest_class is the class attaining it.
struct ScoreRecord {
  std::int64_t sample_id = 0;
  double theta_degrees = 0.0;
  int nearest_class = 0;
  std::vector<double> per_class_angles;  // in model class order
};

/// Ties go to the lowest class id. Throws DegenerateInputError for a zero y.
ScoreRecord score(const HdVector& y, std::span<const ClassDescriptor> classes,
                  std::int64_t sample_id = 0);

ScoreRecord score(const HdVector& y, const FittedModel& model, std::int64_t sample_id = 0);

enum class Decision { in_distribution, out_of_distribution };

std::string_view to_string(Decision d);

/// Out-of-distribution iff theta > threshold (strict).
Decision decide(const ScoreRecord& record, double threshold_degrees);

/// Angle between two image descriptors, raw arccos in [0, 180]. Pipeline
/// descriptors land in [0, 90] in practice; values above 90 are reported as
/// they are.
double pairwise_similarity(const HdVector& y1, const HdVector& y2);

}  // namespace hdff
