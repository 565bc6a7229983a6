#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hmpf/config.hpp"
#include "hmpf/dataset.hpp"
#include "hmpf/types.hpp"

namespace hmpf {

// Seeded place-recognition benchmark built from feature vectors alone.
// Query i truly matches reference i. Every method sees the true match but
// also a private set of aliased distractors; the sets are disjoint across
// methods, so each method is fooled on different queries.
struct SyntheticSpec {
  std::size_t reference_count = 50;
  std::size_t query_count = 50;
  std::size_t method_count = 3;
  std::size_t distractors = 5;
  std::uint64_t seed = 42;
};

enum class QueryCase {
  kClean,    // true match clearly best for every method
  kAliased,  // one method ranks one of its distractors first
  kHard,     // the final method prefers a distractor that the hierarchy
             // filters out earlier but that wins under parallel fusion
};

struct SyntheticBenchmark {
  SyntheticSpec spec;
  // [method][image]
  std::vector<std::vector<FeatureVector>> references;
  std::vector<std::vector<FeatureVector>> queries;
  // [query][method]: that method's distractors for the query.
  std::vector<std::vector<std::vector<RefId>>> distractors;
  std::vector<QueryCase> cases;

  Dataset dataset() const;
  // One precomputed-features method per tier, files named as written by
  // write_synthetic_benchmark, relative to `dir`.
  PipelineConfig hierarchy_config(const std::filesystem::path& dir = {}) const;
  PipelineConfig parallel_config(const std::filesystem::path& dir = {}) const;
};

// Per-tier candidate counts for an M-tier hierarchy: 10 from the next-to-last
// tier, 1 from the last, and five times more per step toward the first.
// Three tiers give (50, 10, 1).
std::vector<CandidateCount> default_synthetic_schedule(std::size_t method_count);

// Throws kValidation unless references >= queries >= 1, methods >= 1, and
// the distractor sets fit: methods * distractors < references.
// Every query is checked against the pipeline while generating: the
// hierarchy's combined decision is correct and the true match is among each
// method's top 10. Hard queries must also defeat parallel fusion; a query
// that fails its checks is redrawn and finally falls back to the clean case.
SyntheticBenchmark generate_synthetic_benchmark(const SyntheticSpec& spec);

// Writes manifest.json, hierarchy.json, parallel.json, m<k>_references.hmpf,
// m<k>_queries.hmpf (k from 1), and distractors.csv into `dir`.
void write_synthetic_benchmark(const SyntheticBenchmark& bench,
                               const std::filesystem::path& dir);

// Uniform [0, 1) features, reproducible on every platform for a given seed.
std::vector<FeatureVector> random_features(std::size_t count, std::size_t dim,
                                           std::uint64_t seed);

}  // namespace hmpf
