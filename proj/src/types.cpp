#include "hmpf/types.hpp"

#include <cmath>

namespace hmpf {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage:
      return "usage";
    case ErrorCategory::kIo:
      return "io";
    case ErrorCategory::kParse:
      return "parse";
    case ErrorCategory::kValidation:
      return "validation";
    case ErrorCategory::kMismatch:
      return "mismatch";
    case ErrorCategory::kInternal:
      return "internal";
  }
  return "internal";
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage:
      return 2;
    case ErrorCategory::kIo:
      return 3;
    case ErrorCategory::kParse:
      return 4;
    case ErrorCategory::kValidation:
      return 5;
    case ErrorCategory::kMismatch:
      return 6;
    case ErrorCategory::kInternal:
      return 70;
  }
  return 70;
}

CandidateSet CandidateSet::from_unsorted(std::vector<RefId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  CandidateSet set;
  set.ids_ = std::move(ids);
  return set;
}

CandidateSet CandidateSet::all(std::size_t count) {
  CandidateSet set;
  set.ids_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    set.ids_.emplace_back(static_cast<std::uint32_t>(i));
  }
  return set;
}

bool CandidateSet::contains(RefId id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

std::optional<std::size_t> CandidateSet::position(RefId id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

bool CandidateSet::is_subset_of(const CandidateSet& other) const {
  return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(),
                       ids_.end());
}

CandidateSet set_union(const CandidateSet& a, const CandidateSet& b) {
  CandidateSet out;
  out.ids_.reserve(a.size() + b.size());
  std::set_union(a.ids_.begin(), a.ids_.end(), b.ids_.begin(), b.ids_.end(),
                 std::back_inserter(out.ids_));
  return out;
}

RawDistances make_raw_distances(CandidateSet ids, std::vector<double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      fail(ErrorCategory::kValidation,
           "raw distance for reference " +
               std::to_string(i < ids.size() ? ids[i].index : i) +
               " is not a finite non-negative value");
    }
  }
  return RawDistances(std::move(ids), std::move(values));
}

FeatureVector::FeatureVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) {
    fail(ErrorCategory::kValidation, "feature vector must be non-empty");
  }
  for (const double v : values_) {
    if (!std::isfinite(v)) {
      fail(ErrorCategory::kValidation, "feature vector has non-finite value");
    }
  }
}

}  // namespace hmpf
