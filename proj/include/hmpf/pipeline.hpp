#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmpf/config.hpp"
#include "hmpf/dataset.hpp"
#include "hmpf/types.hpp"

namespace hmpf {

// A bound image-scoring method. Implementations are immutable after
// construction and safe to call from several threads.
class ScoringMethod {
 public:
  virtual ~ScoringMethod() = default;
  // Raw distance from `query` to every candidate.
  virtual RawDistances score(QueryId query, const CandidateSet& candidates) const = 0;
};

using MethodHandle = std::shared_ptr<const ScoringMethod>;

// Binds `spec` against the dataset: loads feature/score files or computes
// descriptors for every image. Throws kMismatch when file sizes disagree
// with the dataset's image counts.
MethodHandle bind_method(const MethodSpec& spec, const Dataset& dataset);

// Wraps precomputed feature vectors (also used by tests and the bindings).
MethodHandle make_feature_method(std::vector<FeatureVector> references,
                                 std::vector<FeatureVector> queries,
                                 DistanceMetric metric);
MethodHandle make_score_matrix_method(ScoreMatrix matrix);

struct TierRecord {
  std::size_t tier_index = 0;
  // Candidates the tier scored; the key set of every per-method vector.
  CandidateSet evaluated;
  std::vector<NormalizedScores> per_method_scores;
  CandidateSet selected;
};

// Throws kInternal if per-method key sets differ from `evaluated` or
// `selected` is not a subset of it.
void validate_tier_record(const TierRecord& record);

// Ids of the k highest scores, ties toward the lower id; all ids when k is
// unset or at least the size.
CandidateSet top_k(const NormalizedScores& scores, const CandidateCount& k);

// Scores `candidates_in` with each method, min-max normalizes, and selects
// the union of every method's top k_out.
TierRecord run_tier(std::size_t tier_index, const TierSpec& tier,
                    std::span<const MethodHandle> methods, QueryId query,
                    const CandidateSet& candidates_in);

struct FinalDecision {
  RefId best;
  // Per-candidate mean of the tier's normalized method scores.
  NormalizedScores mean_scores;
};

FinalDecision final_tier_decision(const TierRecord& record);

struct CombinedDecision {
  RefId best;
  FusedScores fused;
  StandardizedScores standardized;
};

// Cross-tier fusion over the final tier's evaluated candidates. Earlier tiers
// contribute their per-candidate method maximum restricted to that set and
// rescaled to [0, 1]; the final tier contributes its mean vector. The
// weighted sum is standardized and its argmax (lower id on ties) returned.
CombinedDecision combined_score(std::span<const TierRecord> records,
                                std::span<const double> weights);

// Non-hierarchical baseline: every method scores the full reference set and
// the same fusion rules are applied once with no candidate shrinkage.
CombinedDecision parallel_fusion(std::span<const std::vector<MethodHandle>> tiers,
                                 std::span<const double> weights, QueryId query,
                                 std::size_t reference_count);

struct MatchResult {
  QueryId query;
  RefId final_tier_best;
  std::optional<RefId> combined_best;
  std::vector<TierRecord> tier_records;
  std::vector<double> tier_seconds;
  double total_seconds = 0.0;
};

class Pipeline {
 public:
  // `methods[t][m]` scores method m of tier t. Throws kValidation when the
  // shape does not match the config.
  Pipeline(PipelineConfig config, std::vector<std::vector<MethodHandle>> methods,
           std::size_t reference_count, std::size_t query_count);

  static Pipeline bind(PipelineConfig config, const Dataset& dataset);

  // Tier 1 scores every reference; each later tier scores the previous
  // tier's selection. Pure function of (pipeline, query).
  MatchResult run_query(QueryId query) const;

  const PipelineConfig& config() const { return config_; }
  const std::vector<std::vector<MethodHandle>>& methods() const { return methods_; }
  std::size_t reference_count() const { return reference_count_; }
  std::size_t query_count() const { return query_count_; }

 private:
  PipelineConfig config_;
  std::vector<std::vector<MethodHandle>> methods_;
  std::size_t reference_count_ = 0;
  std::size_t query_count_ = 0;
};

}  // namespace hmpf
