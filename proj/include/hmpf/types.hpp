#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmpf/error.hpp"

namespace hmpf {

// Position of an image in an ordered list. Query and reference lists are
// separate namespaces, so the two id types do not convert into each other.
template <typename Tag>
struct ImageIndex {
  std::uint32_t index = 0;

  constexpr ImageIndex() = default;
  constexpr explicit ImageIndex(std::uint32_t i) : index(i) {}

  friend constexpr auto operator<=>(ImageIndex, ImageIndex) = default;
};

struct QueryTag {};
struct ReferenceTag {};

using QueryId = ImageIndex<QueryTag>;
using RefId = ImageIndex<ReferenceTag>;

// Strictly ascending, duplicate-free set of reference ids.
class CandidateSet {
 public:
  CandidateSet() = default;

  // Sorts and removes duplicates.
  static CandidateSet from_unsorted(std::vector<RefId> ids);
  // {0, 1, ..., count - 1}
  static CandidateSet all(std::size_t count);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(RefId id) const;
  // Position of `id` in the ascending order, if present.
  std::optional<std::size_t> position(RefId id) const;
  bool is_subset_of(const CandidateSet& other) const;

  RefId operator[](std::size_t i) const { return ids_[i]; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<RefId>& ids() const { return ids_; }

  friend CandidateSet set_union(const CandidateSet& a, const CandidateSet& b);
  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;

 private:
  std::vector<RefId> ids_;
};

// Per-candidate scores keyed by a CandidateSet. `Kind` separates raw
// distances from normalized and standardized scores at the type level.
template <typename Kind>
class ScoreVector {
 public:
  ScoreVector() = default;
  ScoreVector(CandidateSet ids, std::vector<double> values)
      : ids_(std::move(ids)), values_(std::move(values)) {
    if (ids_.size() != values_.size()) {
      fail(ErrorCategory::kInternal,
           "score vector: " + std::to_string(ids_.size()) + " ids but " +
               std::to_string(values_.size()) + " values");
    }
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const CandidateSet& ids() const { return ids_; }
  std::span<const double> values() const { return values_; }
  RefId id(std::size_t i) const { return ids_[i]; }
  double value(std::size_t i) const { return values_[i]; }

  std::optional<double> find(RefId id) const {
    const auto pos = ids_.position(id);
    if (!pos) return std::nullopt;
    return values_[*pos];
  }

  double at(RefId id) const {
    const auto v = find(id);
    if (!v) {
      fail(ErrorCategory::kInternal,
           "score vector has no entry for reference " +
               std::to_string(id.index));
    }
    return *v;
  }

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;

 private:
  CandidateSet ids_;
  std::vector<double> values_;
};

struct RawKind {};
struct NormalizedKind {};
struct FusedKind {};
struct StandardizedKind {};

// Lower is more similar; finite and non-negative.
using RawDistances = ScoreVector<RawKind>;
// In [0, 1]; higher is better.
using NormalizedScores = ScoreVector<NormalizedKind>;
// Weighted cross-tier sums, before standardization.
using FusedScores = ScoreVector<FusedKind>;
using StandardizedScores = ScoreVector<StandardizedKind>;

// Throws kValidation unless every value is finite and >= 0.
RawDistances make_raw_distances(CandidateSet ids, std::vector<double> values);

// Argmax with ties broken toward the lower reference id.
template <typename Kind>
RefId argmax(const ScoreVector<Kind>& scores) {
  if (scores.empty()) {
    fail(ErrorCategory::kInternal, "argmax of empty score vector");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    // Ids ascend, so a strict comparison keeps the lowest id among ties.
    if (scores.value(i) > scores.value(best)) best = i;
  }
  return scores.id(best);
}

// Reference ids sorted by descending score, ties toward lower id.
template <typename Kind>
std::vector<RefId> rank_descending(const ScoreVector<Kind>& scores) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores.value(a) > scores.value(b);
                   });
  std::vector<RefId> ranked;
  ranked.reserve(order.size());
  for (const std::size_t i : order) ranked.push_back(scores.id(i));
  return ranked;
}

class FeatureVector {
 public:
  FeatureVector() = default;
  // Throws kValidation on empty input or non-finite values.
  explicit FeatureVector(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<double> values_;
};

}  // namespace hmpf
