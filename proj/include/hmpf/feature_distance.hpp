#pragma once

#include <span>
#include <string_view>

#include "hmpf/types.hpp"

namespace hmpf {

enum class DistanceMetric { kEuclidean, kCosine };

std::string_view metric_name(DistanceMetric metric);
// Accepts "euclidean" and "cosine" / "cosine-distance". Throws kValidation.
DistanceMetric parse_metric(std::string_view name);

// Euclidean: L2 norm of the difference. Cosine: 1 - cos(a, b) clamped to
// [0, 2]; throws kValidation if either side is the zero vector.
double feature_distance(const FeatureVector& a, const FeatureVector& b,
                        DistanceMetric metric);

// One raw distance per candidate. Throws kMismatch on differing dims and
// kValidation when a candidate is outside `refs`.
RawDistances score_by_features(const FeatureVector& query,
                               std::span<const FeatureVector> refs,
                               const CandidateSet& candidates,
                               DistanceMetric metric);

}  // namespace hmpf
