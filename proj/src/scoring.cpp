#include "hmpf/scoring.hpp"

#include <algorithm>
#include <cmath>

namespace hmpf {

NormalizedScores min_max_normalize(const RawDistances& raw) {
  if (raw.empty()) fail(ErrorCategory::kValidation, "cannot normalize an empty score vector");
  const auto values = raw.values();
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(values.size(), 1.0);
  if (hi > lo) {
    const double span = lo - hi;
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i] = std::clamp((values[i] - hi) / span, 0.0, 1.0);
    }
  }
  return NormalizedScores(raw.ids(), std::move(out));
}

NormalizedScores renormalize_01(const NormalizedScores& scores) {
  if (scores.empty()) {
    fail(ErrorCategory::kValidation, "cannot renormalize an empty score vector");
  }
  const auto values = scores.values();
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(values.size(), 1.0);
  if (hi > lo) {
    const double span = hi - lo;
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i] = std::clamp((values[i] - lo) / span, 0.0, 1.0);
    }
  }
  return NormalizedScores(scores.ids(), std::move(out));
}

StandardizedScores standardize(const FusedScores& scores) {
  const auto values = scores.values();
  const std::size_t n = values.size();
  std::vector<double> out(values.begin(), values.end());
  if (n == 0) return StandardizedScores(scores.ids(), std::move(out));
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double& v : out) {
    v -= mean;
    ss += v * v;
  }
  if (n > 1) {
    const double sigma = std::sqrt(ss / static_cast<double>(n - 1));
    if (sigma > 0.0) {
      for (double& v : out) v /= sigma;
    }
  }
  return StandardizedScores(scores.ids(), std::move(out));
}

NormalizedScores tier_max_across_methods(std::span<const NormalizedScores> per_method) {
  if (per_method.empty()) {
    fail(ErrorCategory::kValidation, "tier max needs at least one method");
  }
  const CandidateSet& ids = per_method.front().ids();
  std::vector<double> out(per_method.front().values().begin(),
                          per_method.front().values().end());
  for (std::size_t m = 1; m < per_method.size(); ++m) {
    if (per_method[m].ids() != ids) {
      fail(ErrorCategory::kMismatch,
           "tier max: method " + std::to_string(m) + " scored a different candidate set");
    }
    const auto values = per_method[m].values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], values[i]);
  }
  return NormalizedScores(ids, std::move(out));
}

}  // namespace hmpf
