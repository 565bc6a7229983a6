#include "hmpf/feature_distance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hmpf {

std::string_view metric_name(DistanceMetric metric) {
  return metric == DistanceMetric::kCosine ? "cosine" : "euclidean";
}

DistanceMetric parse_metric(std::string_view name) {
  if (name == "euclidean") return DistanceMetric::kEuclidean;
  if (name == "cosine" || name == "cosine-distance") return DistanceMetric::kCosine;
  fail(ErrorCategory::kValidation,
       "unknown distance metric '" + std::string(name) + "'");
}

double feature_distance(const FeatureVector& a, const FeatureVector& b,
                        DistanceMetric metric) {
  if (a.dim() != b.dim()) {
    fail(ErrorCategory::kMismatch, "feature dims differ: " +
                                       std::to_string(a.dim()) + " vs " +
                                       std::to_string(b.dim()));
  }
  if (metric == DistanceMetric::kEuclidean) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
      const double d = a[i] - b[i];
      sum += d * d;
    }
    return std::sqrt(sum);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    fail(ErrorCategory::kValidation, "cosine distance of a zero vector");
  }
  return std::clamp(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 2.0);
}

RawDistances score_by_features(const FeatureVector& query,
                               std::span<const FeatureVector> refs,
                               const CandidateSet& candidates,
                               DistanceMetric metric) {
  std::vector<double> values;
  values.reserve(candidates.size());
  for (const RefId id : candidates) {
    if (id.index >= refs.size()) {
      fail(ErrorCategory::kValidation,
           "candidate " + std::to_string(id.index) + " outside " +
               std::to_string(refs.size()) + " reference features");
    }
    values.push_back(feature_distance(query, refs[id.index], metric));
  }
  return make_raw_distances(candidates, std::move(values));
}

}  // namespace hmpf
