#include "hmpf/evaluation.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "hmpf/scoring.hpp"

namespace hmpf {
namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCategory::kIo, "cannot write " + path.string());
  return out;
}

double fraction(std::size_t hits, std::size_t total) {
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

GroundTruthOracle::GroundTruthOracle(const GroundTruthSpec& spec, std::size_t query_count,
                                     std::size_t reference_count)
    : reference_count_(reference_count) {
  if (spec.mode == GroundTruthMode::kMetric &&
      (spec.query_coords.size() != query_count ||
       spec.reference_coords.size() != reference_count)) {
    fail(ErrorCategory::kValidation,
         "metric ground truth needs coordinates for every query and reference");
  }
  matches_.reserve(query_count);
  for (std::size_t q = 0; q < query_count; ++q) {
    std::vector<RefId> in_tolerance;
    for (std::size_t r = 0; r < reference_count; ++r) {
      bool ok = false;
      if (spec.mode == GroundTruthMode::kFrameOffset) {
        const std::size_t offset = q > r ? q - r : r - q;
        ok = offset <= spec.frame_tolerance;
      } else {
        const auto& a = spec.query_coords[q];
        const auto& b = spec.reference_coords[r];
        ok = std::hypot(a.x_m - b.x_m, a.y_m - b.y_m) <= spec.metric_tolerance_m;
      }
      if (ok) in_tolerance.emplace_back(static_cast<std::uint32_t>(r));
    }
    matches_.push_back(CandidateSet::from_unsorted(std::move(in_tolerance)));
  }
}

bool GroundTruthOracle::is_correct(QueryId query, RefId match) const {
  if (match.index >= reference_count_) {
    fail(ErrorCategory::kValidation,
         "reference " + std::to_string(match.index) + " out of range");
  }
  return matches(query).contains(match);
}

const CandidateSet& GroundTruthOracle::matches(QueryId query) const {
  if (query.index >= matches_.size()) {
    fail(ErrorCategory::kValidation, "query " + std::to_string(query.index) + " out of range");
  }
  return matches_[query.index];
}

RecallCurve recall_at_n(std::span<const std::vector<RefId>> ranked_lists,
                        const GroundTruthOracle& oracle,
                        std::span<const std::size_t> n_values) {
  if (ranked_lists.size() != oracle.query_count()) {
    fail(ErrorCategory::kValidation,
         "recall needs one ranked list per query (" + std::to_string(oracle.query_count()) +
             "), got " + std::to_string(ranked_lists.size()));
  }
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] == 0 || (i > 0 && n_values[i] <= n_values[i - 1])) {
      fail(ErrorCategory::kValidation, "recall n values must be positive and ascending");
    }
  }
  // Rank of the first correct reference per query, or SIZE_MAX.
  std::vector<std::size_t> first_hit(ranked_lists.size(), SIZE_MAX);
  std::size_t shortest = SIZE_MAX;
  for (std::size_t q = 0; q < ranked_lists.size(); ++q) {
    const auto& list = ranked_lists[q];
    shortest = std::min(shortest, list.size());
    std::set<RefId> seen;
    const QueryId query(static_cast<std::uint32_t>(q));
    for (std::size_t rank = 0; rank < list.size(); ++rank) {
      if (!seen.insert(list[rank]).second) {
        fail(ErrorCategory::kValidation, "ranked list for query " + std::to_string(q) +
                                             " repeats reference " +
                                             std::to_string(list[rank].index));
      }
      if (first_hit[q] == SIZE_MAX && oracle.is_correct(query, list[rank])) {
        first_hit[q] = rank;
      }
    }
  }

  RecallCurve curve;
  for (const std::size_t n : n_values) {
    std::size_t hits = 0;
    for (const std::size_t rank : first_hit) {
      if (rank < n) ++hits;
    }
    curve.n_values.push_back(n);
    curve.recall.push_back(fraction(hits, ranked_lists.size()));
    curve.clamped.push_back(!ranked_lists.empty() && n > shortest);
  }
  return curve;
}

std::vector<MatchResult> run_all_queries(const Pipeline& pipeline, std::size_t workers) {
  const std::size_t count = pipeline.query_count();
  std::vector<MatchResult> results(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<bool> stop{false};
  const auto work = [&] {
    while (!stop.load()) {
      const std::size_t q = next.fetch_add(1);
      if (q >= count) return;
      try {
        results[q] = pipeline.run_query(QueryId(static_cast<std::uint32_t>(q)));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

std::string schedule_to_string(const PipelineConfig& config) {
  std::string out;
  for (std::size_t t = 0; t < config.tiers.size(); ++t) {
    if (t) out += ',';
    out += count_to_string(config.tiers[t].k_out);
  }
  return out;
}

ExperimentReport summarize(const Pipeline& pipeline, std::span<const MatchResult> results,
                           const GroundTruthOracle& oracle, const std::string& label) {
  const PipelineConfig& config = pipeline.config();
  const std::size_t tiers = config.tiers.size();
  ExperimentReport report;
  report.label = label;
  report.schedule = schedule_to_string(config);
  report.query_count = results.size();
  report.config_snapshot = config_to_json(config);
  report.mean_tier_seconds.assign(tiers, 0.0);
  report.mean_tier_selected.assign(tiers, 0.0);

  std::vector<std::vector<std::size_t>> method_hits(tiers);
  for (std::size_t t = 0; t < tiers; ++t) method_hits[t].assign(config.tiers[t].methods.size(), 0);
  std::size_t final_hits = 0;
  std::size_t combined_hits = 0;
  double total_seconds = 0.0;
  for (const MatchResult& r : results) {
    for (std::size_t t = 0; t < tiers; ++t) {
      const TierRecord& record = r.tier_records.at(t);
      for (std::size_t m = 0; m < record.per_method_scores.size(); ++m) {
        if (oracle.is_correct(r.query, argmax(record.per_method_scores[m]))) {
          ++method_hits[t][m];
        }
      }
      report.mean_tier_seconds[t] += r.tier_seconds.at(t);
      report.mean_tier_selected[t] += static_cast<double>(record.selected.size());
    }
    if (oracle.is_correct(r.query, r.final_tier_best)) ++final_hits;
    if (r.combined_best && oracle.is_correct(r.query, *r.combined_best)) ++combined_hits;
    total_seconds += r.total_seconds;
  }
  const double n = results.empty() ? 1.0 : static_cast<double>(results.size());
  for (std::size_t t = 0; t < tiers; ++t) {
    report.mean_tier_seconds[t] /= n;
    report.mean_tier_selected[t] /= n;
    for (std::size_t m = 0; m < method_hits[t].size(); ++m) {
      report.method_recalls.push_back(
          {t + 1, config.tiers[t].methods[m].name, fraction(method_hits[t][m], results.size())});
    }
  }
  report.final_recall_at_1 = fraction(final_hits, results.size());
  if (config.combined_enabled) {
    report.combined_recall_at_1 = fraction(combined_hits, results.size());
  }
  report.mean_seconds_per_query = total_seconds / n;
  return report;
}

ExperimentReport run_experiment(const Dataset& dataset, const PipelineConfig& config,
                                const ExperimentOptions& options) {
  const Pipeline pipeline = Pipeline::bind(config, dataset);
  const GroundTruthOracle oracle(dataset);
  const auto results = run_all_queries(pipeline, options.workers);
  return summarize(pipeline, results, oracle, options.label);
}

std::vector<ExperimentReport> run_sweep(const Dataset& dataset, const PipelineConfig& config,
                                        std::span<const std::vector<CandidateCount>> schedules,
                                        const ExperimentOptions& options) {
  // Validate every schedule before the (possibly slow) binding.
  std::vector<PipelineConfig> configs;
  for (const auto& schedule : schedules) configs.push_back(with_schedule(config, schedule));
  const Pipeline bound = Pipeline::bind(config, dataset);
  const GroundTruthOracle oracle(dataset);
  std::vector<ExperimentReport> reports;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Pipeline pipeline(configs[i], bound.methods(), bound.reference_count(),
                            bound.query_count());
    const auto results = run_all_queries(pipeline, options.workers);
    reports.push_back(summarize(pipeline, results, oracle, options.label));
  }
  return reports;
}

std::vector<NamedCurve> recall_curves(const Pipeline& pipeline,
                                      std::span<const MatchResult> results,
                                      const GroundTruthOracle& oracle,
                                      std::span<const std::size_t> n_values) {
  const PipelineConfig& config = pipeline.config();
  std::vector<NamedCurve> curves;
  const auto add_curve = [&](std::string name, auto&& rank_of) {
    std::vector<std::vector<RefId>> lists;
    lists.reserve(results.size());
    for (const auto& r : results) lists.push_back(rank_of(r));
    curves.push_back({std::move(name), recall_at_n(lists, oracle, n_values)});
  };
  for (std::size_t t = 0; t < config.tiers.size(); ++t) {
    for (std::size_t m = 0; m < config.tiers[t].methods.size(); ++m) {
      add_curve("t" + std::to_string(t + 1) + ":" + config.tiers[t].methods[m].name,
                [&](const MatchResult& r) {
                  return rank_descending(r.tier_records[t].per_method_scores[m]);
                });
    }
  }
  add_curve("final", [](const MatchResult& r) {
    return rank_descending(final_tier_decision(r.tier_records.back()).mean_scores);
  });
  if (config.combined_enabled) {
    const auto weights = config.weights();
    add_curve("combined", [&](const MatchResult& r) {
      return rank_descending(combined_score(r.tier_records, weights).standardized);
    });
  }
  return curves;
}

void write_report_csv(const std::filesystem::path& path,
                      std::span<const ExperimentReport> reports) {
  auto out = open_output(path);
  out << "experiment,schedule,row,tier,method,recall_at_1,seconds_per_frame,mean_selected\n";
  for (const auto& r : reports) {
    const std::string prefix = csv_field(r.label) + "," + csv_field(r.schedule) + ",";
    for (const auto& m : r.method_recalls) {
      out << prefix << "method," << m.tier << "," << csv_field(m.method) << ","
          << format_double(m.recall_at_1) << ",,\n";
    }
    for (std::size_t t = 0; t < r.mean_tier_seconds.size(); ++t) {
      out << prefix << "tier," << (t + 1) << ",,," << format_double(r.mean_tier_seconds[t])
          << "," << format_double(r.mean_tier_selected[t]) << "\n";
    }
    out << prefix << "final,,," << format_double(r.final_recall_at_1) << ",,\n";
    out << prefix << "combined,,,"
        << (r.combined_recall_at_1 ? format_double(*r.combined_recall_at_1) : "") << ",,\n";
    out << prefix << "total,,,," << format_double(r.mean_seconds_per_query) << ",\n";
  }
}

void write_curves_csv(const std::filesystem::path& path, std::span<const NamedCurve> curves) {
  auto out = open_output(path);
  out << "curve,n,recall,clamped\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.curve.n_values.size(); ++i) {
      out << csv_field(c.name) << "," << c.curve.n_values[i] << "," << format_double(c.curve.recall[i])
          << "," << (c.curve.clamped[i] ? 1 : 0) << "\n";
    }
  }
}

void write_results_csv(const std::filesystem::path& path, const PipelineConfig& config,
                       std::span<const MatchResult> results, const GroundTruthOracle& oracle) {
  auto out = open_output(path);
  const std::size_t tiers = config.tiers.size();
  out << "query,final_best,combined_best,final_correct,combined_correct";
  for (std::size_t t = 1; t <= tiers; ++t) out << ",tier" << t << "_selected";
  for (std::size_t t = 1; t <= tiers; ++t) out << ",tier" << t << "_ms";
  out << "\n";
  for (const auto& r : results) {
    out << r.query.index << "," << r.final_tier_best.index << ",";
    if (r.combined_best) out << r.combined_best->index;
    out << "," << (oracle.is_correct(r.query, r.final_tier_best) ? 1 : 0) << ",";
    if (r.combined_best) out << (oracle.is_correct(r.query, *r.combined_best) ? 1 : 0);
    for (const auto& record : r.tier_records) out << "," << record.selected.size();
    for (const double s : r.tier_seconds) out << "," << format_double(s * 1000.0);
    out << "\n";
  }
}

}  // namespace hmpf
