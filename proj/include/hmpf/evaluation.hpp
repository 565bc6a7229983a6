#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmpf/config.hpp"
#include "hmpf/dataset.hpp"
#include "hmpf/pipeline.hpp"

namespace hmpf {

// Resolves, once per dataset, which references are within tolerance of
// each query.
class GroundTruthOracle {
 public:
  // Throws kValidation when metric mode lacks coordinates for an image.
  GroundTruthOracle(const GroundTruthSpec& spec, std::size_t query_count,
                    std::size_t reference_count);
  explicit GroundTruthOracle(const Dataset& dataset)
      : GroundTruthOracle(dataset.ground_truth, dataset.query_count,
                          dataset.reference_count) {}

  // Frame-offset: |query - match| <= frame_tolerance. Metric: planar distance
  // <= metric_tolerance_m. Throws kValidation on out-of-range ids.
  bool is_correct(QueryId query, RefId match) const;
  const CandidateSet& matches(QueryId query) const;
  bool has_match(QueryId query) const { return !matches(query).empty(); }
  std::size_t query_count() const { return matches_.size(); }
  std::size_t reference_count() const { return reference_count_; }

 private:
  std::size_t reference_count_ = 0;
  std::vector<CandidateSet> matches_;
};

inline bool is_correct(QueryId query, RefId match, const GroundTruthOracle& oracle) {
  return oracle.is_correct(query, match);
}

struct RecallCurve {
  std::vector<std::size_t> n_values;
  std::vector<double> recall;
  // True where n exceeded the length of at least one ranked list.
  std::vector<bool> clamped;
};

// recall(n) = fraction of queries whose first n ranked ids contain an
// in-tolerance reference. ranked_lists[q] belongs to query q. Throws
// kValidation on duplicate ids, a non-ascending or zero n, or a list count
// that differs from the oracle's query count.
RecallCurve recall_at_n(std::span<const std::vector<RefId>> ranked_lists,
                        const GroundTruthOracle& oracle,
                        std::span<const std::size_t> n_values);

struct MethodRecall {
  std::size_t tier = 0;
  std::string method;
  // Best candidate of this method within its tier's evaluated set.
  double recall_at_1 = 0.0;
};

struct ExperimentReport {
  std::string label;
  std::string schedule;
  std::size_t query_count = 0;
  std::vector<MethodRecall> method_recalls;
  double final_recall_at_1 = 0.0;
  std::optional<double> combined_recall_at_1;
  double mean_seconds_per_query = 0.0;
  std::vector<double> mean_tier_seconds;
  std::vector<double> mean_tier_selected;
  std::string config_snapshot;
};

struct NamedCurve {
  std::string name;
  RecallCurve curve;
};

struct ExperimentOptions {
  std::size_t workers = 1;
  std::string label = "experiment";
};

// Runs every query; results are ordered by query id regardless of workers.
// The first error raised by any worker is rethrown.
std::vector<MatchResult> run_all_queries(const Pipeline& pipeline, std::size_t workers);

ExperimentReport summarize(const Pipeline& pipeline, std::span<const MatchResult> results,
                           const GroundTruthOracle& oracle, const std::string& label);

ExperimentReport run_experiment(const Dataset& dataset, const PipelineConfig& config,
                                const ExperimentOptions& options = {});

// One report per schedule over a single binding of the methods.
std::vector<ExperimentReport> run_sweep(const Dataset& dataset, const PipelineConfig& config,
                                        std::span<const std::vector<CandidateCount>> schedules,
                                        const ExperimentOptions& options = {});

// Curves for each tier's methods ("t<tier>:<method>"), the final-tier mean
// ("final"), and the combined score ("combined", when enabled).
std::vector<NamedCurve> recall_curves(const Pipeline& pipeline,
                                      std::span<const MatchResult> results,
                                      const GroundTruthOracle& oracle,
                                      std::span<const std::size_t> n_values);

std::string schedule_to_string(const PipelineConfig& config);

// Column layouts are documented in docs/interface.md.
void write_report_csv(const std::filesystem::path& path,
                      std::span<const ExperimentReport> reports);
void write_curves_csv(const std::filesystem::path& path, std::span<const NamedCurve> curves);
void write_results_csv(const std::filesystem::path& path, const PipelineConfig& config,
                       std::span<const MatchResult> results, const GroundTruthOracle& oracle);

}  // namespace hmpf
