#include "hmpf/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "hmpf/feature_file.hpp"
#include "hmpf/gist.hpp"
#include "hmpf/hog.hpp"
#include "hmpf/local_features.hpp"
#include "hmpf/scoring.hpp"

namespace hmpf {
namespace {

class FeatureMethod final : public ScoringMethod {
 public:
  FeatureMethod(std::vector<FeatureVector> refs, std::vector<FeatureVector> queries,
                DistanceMetric metric)
      : refs_(std::move(refs)), queries_(std::move(queries)), metric_(metric) {}

  RawDistances score(QueryId query, const CandidateSet& candidates) const override {
    if (query.index >= queries_.size()) {
      fail(ErrorCategory::kValidation, "query " + std::to_string(query.index) +
                                           " has no feature vector");
    }
    return score_by_features(queries_[query.index], refs_, candidates, metric_);
  }

 private:
  std::vector<FeatureVector> refs_;
  std::vector<FeatureVector> queries_;
  DistanceMetric metric_;
};

class ScoreMatrixMethod final : public ScoringMethod {
 public:
  explicit ScoreMatrixMethod(ScoreMatrix matrix) : matrix_(std::move(matrix)) {}

  RawDistances score(QueryId query, const CandidateSet& candidates) const override {
    if (query.index >= matrix_.rows()) {
      fail(ErrorCategory::kValidation,
           "query " + std::to_string(query.index) + " outside score matrix");
    }
    std::vector<double> values;
    values.reserve(candidates.size());
    for (const RefId id : candidates) {
      if (id.index >= matrix_.cols()) {
        fail(ErrorCategory::kValidation,
             "reference " + std::to_string(id.index) + " outside score matrix");
      }
      values.push_back(matrix_.at(query.index, id.index));
    }
    return make_raw_distances(candidates, std::move(values));
  }

 private:
  ScoreMatrix matrix_;
};

class LocalFeatureMethod final : public ScoringMethod {
 public:
  LocalFeatureMethod(std::vector<std::vector<BinaryDescriptor>> refs,
                     std::vector<std::vector<BinaryDescriptor>> queries,
                     MatchFilterParams filter)
      : refs_(std::move(refs)), queries_(std::move(queries)), filter_(filter) {}

  RawDistances score(QueryId query, const CandidateSet& candidates) const override {
    std::vector<double> values;
    values.reserve(candidates.size());
    for (const RefId id : candidates) {
      values.push_back(matched_distance(queries_.at(query.index), refs_.at(id.index),
                                        filter_));
    }
    return make_raw_distances(candidates, std::move(values));
  }

 private:
  std::vector<std::vector<BinaryDescriptor>> refs_;
  std::vector<std::vector<BinaryDescriptor>> queries_;
  MatchFilterParams filter_;
};

void require_images(const Dataset& dataset, const MethodSpec& spec) {
  if (!dataset.has_images()) {
    fail(ErrorCategory::kValidation, "method '" + spec.name + "' (" +
                                         std::string(kind_name(spec.kind())) +
                                         ") needs image lists in the manifest");
  }
}

template <typename Fn>
auto map_images(const std::vector<std::filesystem::path>& images, Fn&& fn) {
  std::vector<decltype(fn(GrayImage{}))> out;
  out.reserve(images.size());
  for (const auto& path : images) out.push_back(fn(load_gray_image(path)));
  return out;
}

void check_count(const MethodSpec& spec, const char* list, std::size_t have,
                 std::size_t expected) {
  if (have != expected) {
    fail(ErrorCategory::kMismatch,
         "method '" + spec.name + "': " + list + " feature count " +
             std::to_string(have) + " != dataset " + list + " count " +
             std::to_string(expected));
  }
}

}  // namespace

MethodHandle make_feature_method(std::vector<FeatureVector> references,
                                 std::vector<FeatureVector> queries,
                                 DistanceMetric metric) {
  return std::make_shared<FeatureMethod>(std::move(references), std::move(queries),
                                         metric);
}

MethodHandle make_score_matrix_method(ScoreMatrix matrix) {
  return std::make_shared<ScoreMatrixMethod>(std::move(matrix));
}

MethodHandle bind_method(const MethodSpec& spec, const Dataset& dataset) {
  return std::visit(
      [&](const auto& p) -> MethodHandle {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, HogMethodParams>) {
          require_images(dataset, spec);
          const auto hog = [&](const GrayImage& img) { return compute_hog(img, p.hog); };
          return make_feature_method(map_images(dataset.reference_images, hog),
                                     map_images(dataset.query_images, hog), p.metric);
        } else if constexpr (std::is_same_v<P, GistMethodParams>) {
          require_images(dataset, spec);
          const auto gist = [](const GrayImage& img) { return compute_gist(img); };
          return make_feature_method(map_images(dataset.reference_images, gist),
                                     map_images(dataset.query_images, gist), p.metric);
        } else if constexpr (std::is_same_v<P, LocalFeatureMethodParams>) {
          require_images(dataset, spec);
          DetectorParams detector;
          detector.max_keypoints = p.max_keypoints;
          const auto describe = [&](const GrayImage& img) {
            return descriptors_of(detect_and_describe(img, detector));
          };
          return std::make_shared<LocalFeatureMethod>(
              map_images(dataset.reference_images, describe),
              map_images(dataset.query_images, describe), p.filter);
        } else if constexpr (std::is_same_v<P, PrecomputedFeatureParams>) {
          auto refs = load_feature_file(p.reference_features);
          auto queries = load_feature_file(p.query_features);
          check_count(spec, "reference", refs.size(), dataset.reference_count);
          check_count(spec, "query", queries.size(), dataset.query_count);
          if (!refs.empty() && !queries.empty() && refs[0].dim() != queries[0].dim()) {
            fail(ErrorCategory::kMismatch,
                 "method '" + spec.name + "': reference dim " +
                     std::to_string(refs[0].dim()) + " != query dim " +
                     std::to_string(queries[0].dim()));
          }
          return make_feature_method(std::move(refs), std::move(queries), p.metric);
        } else {
          auto matrix = load_score_matrix(p.scores_csv);
          check_count(spec, "query", matrix.rows(), dataset.query_count);
          check_count(spec, "reference", matrix.cols(), dataset.reference_count);
          return make_score_matrix_method(std::move(matrix));
        }
      },
      spec.params);
}

void validate_tier_record(const TierRecord& record) {
  for (std::size_t m = 0; m < record.per_method_scores.size(); ++m) {
    if (record.per_method_scores[m].ids() != record.evaluated) {
      fail(ErrorCategory::kInternal,
           "tier " + std::to_string(record.tier_index + 1) + " method " +
               std::to_string(m + 1) + " key set differs from the evaluated set");
    }
  }
  if (!record.selected.is_subset_of(record.evaluated)) {
    fail(ErrorCategory::kInternal, "tier " + std::to_string(record.tier_index + 1) +
                                       " selected candidates it did not evaluate");
  }
}

CandidateSet top_k(const NormalizedScores& scores, const CandidateCount& k) {
  if (!k || *k >= scores.size()) return scores.ids();
  auto ranked = rank_descending(scores);
  ranked.resize(*k);
  return CandidateSet::from_unsorted(std::move(ranked));
}

TierRecord run_tier(std::size_t tier_index, const TierSpec& tier,
                    std::span<const MethodHandle> methods, QueryId query,
                    const CandidateSet& candidates_in) {
  if (candidates_in.empty()) {
    fail(ErrorCategory::kInternal, "tier " + std::to_string(tier_index + 1) +
                                       " received no candidates");
  }
  if (methods.size() != tier.methods.size()) {
    fail(ErrorCategory::kInternal, "tier method count does not match its spec");
  }
  TierRecord record;
  record.tier_index = tier_index;
  record.evaluated = candidates_in;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    RawDistances raw;
    try {
      raw = methods[m]->score(query, candidates_in);
    } catch (const Error& e) {
      fail(e.category(), "method '" + tier.methods[m].name + "' failed on query " +
                             std::to_string(query.index) + ": " + e.what());
    }
    if (raw.ids() != candidates_in) {
      fail(ErrorCategory::kInternal,
           "method '" + tier.methods[m].name + "' scored the wrong candidates");
    }
    auto normalized = min_max_normalize(raw);
    record.selected = set_union(record.selected, top_k(normalized, tier.k_out));
    record.per_method_scores.push_back(std::move(normalized));
  }
  validate_tier_record(record);
  return record;
}

FinalDecision final_tier_decision(const TierRecord& record) {
  if (record.per_method_scores.empty()) {
    fail(ErrorCategory::kInternal, "final tier has no method scores");
  }
  validate_tier_record(record);
  const std::size_t n = record.evaluated.size();
  std::vector<double> mean(n, 0.0);
  for (const auto& scores : record.per_method_scores) {
    const auto values = scores.values();
    for (std::size_t i = 0; i < n; ++i) mean[i] += values[i];
  }
  const double count = static_cast<double>(record.per_method_scores.size());
  for (double& v : mean) v /= count;
  NormalizedScores mean_scores(record.evaluated, std::move(mean));
  const RefId best = argmax(mean_scores);
  return FinalDecision{best, std::move(mean_scores)};
}

CombinedDecision combined_score(std::span<const TierRecord> records,
                                std::span<const double> weights) {
  if (records.empty()) fail(ErrorCategory::kInternal, "combined score of zero tiers");
  if (weights.size() != records.size()) {
    fail(ErrorCategory::kInternal, "combined score needs one weight per tier");
  }
  const TierRecord& last = records.back();
  const FinalDecision final_decision = final_tier_decision(last);
  const CandidateSet& finalists = last.evaluated;

  std::vector<double> fused(finalists.size(), 0.0);
  const auto accumulate = [&](const NormalizedScores& scores, double weight) {
    const auto values = scores.values();
    for (std::size_t i = 0; i < fused.size(); ++i) fused[i] += weight * values[i];
  };
  for (std::size_t t = 0; t + 1 < records.size(); ++t) {
    validate_tier_record(records[t]);
    const NormalizedScores tier_max = tier_max_across_methods(records[t].per_method_scores);
    accumulate(renormalize_01(restrict_to(tier_max, finalists)), weights[t]);
  }
  accumulate(final_decision.mean_scores, weights.back());

  FusedScores fused_scores(finalists, std::move(fused));
  StandardizedScores standardized = standardize(fused_scores);
  const RefId best = argmax(standardized);
  return CombinedDecision{best, std::move(fused_scores), std::move(standardized)};
}

CombinedDecision parallel_fusion(std::span<const std::vector<MethodHandle>> tiers,
                                 std::span<const double> weights, QueryId query,
                                 std::size_t reference_count) {
  if (tiers.empty() || weights.size() != tiers.size()) {
    fail(ErrorCategory::kInternal, "parallel fusion needs one weight per tier");
  }
  const CandidateSet everything = CandidateSet::all(reference_count);
  std::vector<double> fused(reference_count, 0.0);
  for (std::size_t t = 0; t < tiers.size(); ++t) {
    const bool is_final = t + 1 == tiers.size();
    std::vector<double> tier_scores(reference_count, is_final ? 0.0 : -1.0);
    for (const auto& method : tiers[t]) {
      const auto normalized = min_max_normalize(method->score(query, everything));
      for (std::size_t i = 0; i < reference_count; ++i) {
        const double v = normalized.value(i);
        tier_scores[i] = is_final ? tier_scores[i] + v : std::max(tier_scores[i], v);
      }
    }
    if (is_final) {
      for (double& v : tier_scores) v /= static_cast<double>(tiers[t].size());
    } else {
      const auto rescaled = renormalize_01(NormalizedScores(everything, tier_scores));
      tier_scores.assign(rescaled.values().begin(), rescaled.values().end());
    }
    for (std::size_t i = 0; i < reference_count; ++i) fused[i] += weights[t] * tier_scores[i];
  }
  FusedScores fused_scores(everything, std::move(fused));
  StandardizedScores standardized = standardize(fused_scores);
  const RefId best = argmax(standardized);
  return CombinedDecision{best, std::move(fused_scores), std::move(standardized)};
}

Pipeline::Pipeline(PipelineConfig config, std::vector<std::vector<MethodHandle>> methods,
                   std::size_t reference_count, std::size_t query_count)
    : config_(std::move(config)),
      methods_(std::move(methods)),
      reference_count_(reference_count),
      query_count_(query_count) {
  validate_config(config_);
  if (methods_.size() != config_.tiers.size()) {
    fail(ErrorCategory::kValidation, "bound methods do not match the tier count");
  }
  for (std::size_t t = 0; t < methods_.size(); ++t) {
    if (methods_[t].size() != config_.tiers[t].methods.size()) {
      fail(ErrorCategory::kValidation,
           "tier " + std::to_string(t + 1) + " bound method count mismatch");
    }
    for (const auto& m : methods_[t]) {
      if (!m) fail(ErrorCategory::kValidation, "null bound method");
    }
  }
  if (reference_count_ == 0 || query_count_ == 0) {
    fail(ErrorCategory::kValidation, "pipeline needs references and queries");
  }
}

Pipeline Pipeline::bind(PipelineConfig config, const Dataset& dataset) {
  std::vector<std::vector<MethodHandle>> methods;
  for (const auto& tier : config.tiers) {
    auto& bound = methods.emplace_back();
    for (const auto& spec : tier.methods) bound.push_back(bind_method(spec, dataset));
  }
  return Pipeline(std::move(config), std::move(methods), dataset.reference_count,
                  dataset.query_count);
}

MatchResult Pipeline::run_query(QueryId query) const {
  if (query.index >= query_count_) {
    fail(ErrorCategory::kValidation, "query " + std::to_string(query.index) +
                                         " outside " + std::to_string(query_count_) +
                                         " queries");
  }
  const auto query_start = std::chrono::steady_clock::now();
  MatchResult result;
  result.query = query;
  CandidateSet candidates = CandidateSet::all(reference_count_);
  for (std::size_t t = 0; t < config_.tiers.size(); ++t) {
    const auto start = std::chrono::steady_clock::now();
    TierRecord record = run_tier(t, config_.tiers[t], methods_[t], query, candidates);
    candidates = record.selected;
    result.tier_records.push_back(std::move(record));
    result.tier_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  result.final_tier_best = final_tier_decision(result.tier_records.back()).best;
  if (config_.combined_enabled) {
    const auto weights = config_.weights();
    result.combined_best = combined_score(result.tier_records, weights).best;
  }
  result.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - query_start).count();
  return result;
}

}  // namespace hmpf
