#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hmpf/feature_distance.hpp"
#include "hmpf/hog.hpp"
#include "hmpf/local_features.hpp"

namespace hmpf {

enum class MethodKind {
  kHog,
  kGist,
  kLocalFeatures,
  kPrecomputedFeatures,
  kPrecomputedScores,
};

std::string_view kind_name(MethodKind kind);
MethodKind parse_kind(std::string_view name);

struct HogMethodParams {
  HogParams hog;
  DistanceMetric metric = DistanceMetric::kEuclidean;
  friend bool operator==(const HogMethodParams& a, const HogMethodParams& b) {
    return a.hog.cell_px == b.hog.cell_px && a.hog.resize_px == b.hog.resize_px &&
           a.hog.epsilon == b.hog.epsilon && a.metric == b.metric;
  }
};

struct GistMethodParams {
  DistanceMetric metric = DistanceMetric::kEuclidean;
  friend bool operator==(const GistMethodParams&, const GistMethodParams&) = default;
};

struct LocalFeatureMethodParams {
  MatchFilterParams filter;
  int max_keypoints = 500;
  friend bool operator==(const LocalFeatureMethodParams& a,
                         const LocalFeatureMethodParams& b) {
    return a.filter.match_threshold == b.filter.match_threshold &&
           a.filter.max_ratio == b.filter.max_ratio &&
           a.filter.top_n == b.filter.top_n && a.max_keypoints == b.max_keypoints;
  }
};

struct PrecomputedFeatureParams {
  std::filesystem::path reference_features;
  std::filesystem::path query_features;
  DistanceMetric metric = DistanceMetric::kEuclidean;
  friend bool operator==(const PrecomputedFeatureParams&,
                         const PrecomputedFeatureParams&) = default;
};

struct PrecomputedScoreParams {
  std::filesystem::path scores_csv;
  friend bool operator==(const PrecomputedScoreParams&,
                         const PrecomputedScoreParams&) = default;
};

using MethodParams =
    std::variant<HogMethodParams, GistMethodParams, LocalFeatureMethodParams,
                 PrecomputedFeatureParams, PrecomputedScoreParams>;

struct MethodSpec {
  std::string name;
  MethodParams params;

  MethodKind kind() const { return static_cast<MethodKind>(params.index()); }
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

// Candidates each method forwards. Unset means "all": forward every candidate
// the tier received.
using CandidateCount = std::optional<std::size_t>;

std::string count_to_string(const CandidateCount& count);
// Parses a positive integer or the keyword "all". Throws kValidation.
CandidateCount parse_count(std::string_view text);

struct TierSpec {
  std::vector<MethodSpec> methods;
  CandidateCount k_out;
  double weight = 1.0;
  friend bool operator==(const TierSpec&, const TierSpec&) = default;
};

struct PipelineConfig {
  std::vector<TierSpec> tiers;
  bool combined_enabled = true;

  std::vector<double> weights() const;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Tier weights used when the file omits them: 1 for the final tier, 0.25 less
// per step toward the first tier, never below 0. Three tiers give
// (0.5, 0.75, 1).
std::vector<double> default_tier_weights(std::size_t tier_count);

// Throws kValidation unless: at least one tier; every tier has a method;
// numeric k_out >= 1 and strictly decreasing between consecutive tiers that
// both set a number; weights finite and >= 0; method parameters in range.
void validate_config(const PipelineConfig& config);

// JSON pipeline config. Relative file paths resolve against `base_dir`.
// Throws kParse on malformed JSON or wrong field types, kValidation otherwise.
PipelineConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// Serializes with every default made explicit; reloading gives an equal config.
std::string config_to_json(const PipelineConfig& config);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

// Same tiers and methods with k_out replaced per tier. Throws kValidation on a
// length mismatch or if the result violates validate_config.
PipelineConfig with_schedule(const PipelineConfig& config,
                             const std::vector<CandidateCount>& schedule);

// "50,10,all" -> {50, 10, all}. Throws kValidation.
std::vector<CandidateCount> parse_schedule(std::string_view text);

}  // namespace hmpf
