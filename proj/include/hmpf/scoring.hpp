#pragma once

#include <span>

#include "hmpf/types.hpp"

namespace hmpf {

// Maps raw distances onto [0, 1] with the smallest distance at 1 and the
// largest at 0: (d - max) / (min - max). If every distance is equal, every
// candidate scores 1. Throws kValidation on empty input.
NormalizedScores min_max_normalize(const RawDistances& raw);

// (s - min) / (max - min) over already goodness-oriented scores; all-equal
// input maps to all 1. Throws kValidation on empty input.
NormalizedScores renormalize_01(const NormalizedScores& scores);

// Zero mean, unit sample standard deviation (n - 1 divisor). With n = 1 or a
// zero deviation the mean-subtracted (all-zero) vector is returned.
StandardizedScores standardize(const FusedScores& scores);

// Per-candidate maximum over methods. Throws kMismatch unless every input
// shares one key set; kValidation on an empty sequence.
NormalizedScores tier_max_across_methods(std::span<const NormalizedScores> per_method);

// Scores restricted to `subset`. Throws kInternal when an id is missing.
template <typename Kind>
ScoreVector<Kind> restrict_to(const ScoreVector<Kind>& scores, const CandidateSet& subset) {
  std::vector<double> values;
  values.reserve(subset.size());
  for (const RefId id : subset) values.push_back(scores.at(id));
  return ScoreVector<Kind>(subset, std::move(values));
}

}  // namespace hmpf
