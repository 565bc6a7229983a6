#include "hmpf/synthetic.hpp"

#include <fstream>
#include <numeric>
#include <random>

#include "hmpf/feature_file.hpp"
#include "hmpf/pipeline.hpp"
#include "hmpf/scoring.hpp"

namespace hmpf {
namespace {

namespace fs = std::filesystem;

constexpr std::size_t kPaddingDims = 4;
constexpr std::size_t kRetention = 10;
constexpr int kMaxRedraws = 16;

// mt19937_64's output sequence is fixed by the standard; the distributions
// in <random> are not, so uniform draws and shuffles are done by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

double as_float(double v) { return static_cast<double>(static_cast<float>(v)); }

std::string method_name(std::size_t m) { return "m" + std::to_string(m + 1); }

PipelineConfig make_config(std::size_t method_count, const fs::path& dir,
                           const std::vector<CandidateCount>& schedule) {
  PipelineConfig config;
  const auto weights = default_tier_weights(method_count);
  for (std::size_t m = 0; m < method_count; ++m) {
    PrecomputedFeatureParams params;
    params.reference_features = dir / (method_name(m) + "_references.hmpf");
    params.query_features = dir / (method_name(m) + "_queries.hmpf");
    TierSpec tier;
    tier.methods.push_back(MethodSpec{method_name(m), params});
    tier.k_out = schedule[m];
    tier.weight = weights[m];
    config.tiers.push_back(std::move(tier));
  }
  config.combined_enabled = true;
  return config;
}

struct Draft {
  QueryCase kind = QueryCase::kClean;
  std::vector<FeatureVector> vectors;  // one per method
};

class Generator {
 public:
  explicit Generator(const SyntheticSpec& spec)
      : spec_(spec), rng_(spec.seed), dim_(spec.reference_count + kPaddingDims) {
    config_ = make_config(spec.method_count, {},
                          default_synthetic_schedule(spec.method_count));
    weights_ = config_.weights();
    for (std::size_t m = 0; m < spec.method_count; ++m) {
      std::vector<std::size_t> axis(spec.reference_count);
      std::iota(axis.begin(), axis.end(), 0);
      rng_.shuffle(axis);
      axes_.push_back(axis);
      std::vector<FeatureVector> refs;
      for (std::size_t k = 0; k < spec.reference_count; ++k) {
        std::vector<double> v(dim_, 0.0);
        v[axis[k]] = 1.0;
        refs.emplace_back(std::move(v));
      }
      references_.push_back(std::move(refs));
    }
  }

  SyntheticBenchmark run() {
    SyntheticBenchmark bench;
    bench.spec = spec_;
    bench.references = references_;
    bench.queries.assign(spec_.method_count, {});
    for (std::size_t q = 0; q < spec_.query_count; ++q) {
      auto sets = draw_distractors(q);
      const Draft draft = draw_query(q, sets);
      for (std::size_t m = 0; m < spec_.method_count; ++m) {
        bench.queries[m].push_back(draft.vectors[m]);
      }
      bench.distractors.push_back(std::move(sets));
      bench.cases.push_back(draft.kind);
    }
    return bench;
  }

 private:
  std::vector<std::vector<RefId>> draw_distractors(std::size_t q) {
    std::vector<RefId> others;
    for (std::size_t k = 0; k < spec_.reference_count; ++k) {
      if (k != q) others.emplace_back(static_cast<std::uint32_t>(k));
    }
    rng_.shuffle(others);
    std::vector<std::vector<RefId>> sets(spec_.method_count);
    for (std::size_t m = 0; m < spec_.method_count; ++m) {
      sets[m].assign(others.begin() + static_cast<std::ptrdiff_t>(m * spec_.distractors),
                     others.begin() + static_cast<std::ptrdiff_t>((m + 1) * spec_.distractors));
    }
    return sets;
  }

  QueryCase pick_case() {
    const double u = rng_.unit();
    if (spec_.distractors == 0) return QueryCase::kClean;
    if (spec_.method_count >= 2 && u < 0.15) return QueryCase::kHard;
    if (u < 0.60) return QueryCase::kAliased;
    return QueryCase::kClean;
  }

  Draft draw_query(std::size_t q, const std::vector<std::vector<RefId>>& sets) {
    QueryCase kind = pick_case();
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxRedraws) kind = QueryCase::kClean;
      if (attempt > 2 * kMaxRedraws) {
        fail(ErrorCategory::kInternal,
             "synthetic query " + std::to_string(q) + " failed its checks");
      }
      Draft draft = draw_vectors(q, sets, kind);
      if (accept(q, draft)) return draft;
    }
  }

  Draft draw_vectors(std::size_t q, const std::vector<std::vector<RefId>>& sets,
                     QueryCase kind) {
    const std::size_t methods = spec_.method_count;
    const std::size_t refs = spec_.reference_count;
    // coeff[m][k]: how strongly the query resembles reference k under method m.
    std::vector<std::vector<double>> coeff(methods, std::vector<double>(refs));
    for (std::size_t m = 0; m < methods; ++m) {
      for (double& c : coeff[m]) c = rng_.uniform(0.0, 0.3);
      for (const RefId d : sets[m]) coeff[m][d.index] = rng_.uniform(0.45, 0.7);
      coeff[m][q] = rng_.uniform(0.8, 0.9);
    }
    if (kind == QueryCase::kAliased) {
      const std::size_t m = rng_.below(methods);
      const RefId d = sets[m][rng_.below(sets[m].size())];
      coeff[m][d.index] = rng_.uniform(0.92, 1.0);
    } else if (kind == QueryCase::kHard) {
      const std::size_t last = methods - 1;
      const std::size_t filter = methods - 2;
      const std::size_t d = sets[last][0].index;
      coeff[last][d] = 1.0;
      coeff[last][q] = rng_.uniform(0.45, 0.55);
      coeff[filter][q] = rng_.uniform(0.55, 0.65);
      coeff[filter][d] = rng_.uniform(0.1, 0.2);
      for (std::size_t m = 0; m < filter; ++m) {
        coeff[m][q] = rng_.uniform(0.3, 0.4);
        coeff[m][d] = rng_.uniform(0.25, 0.3);
      }
    }
    Draft draft;
    draft.kind = kind;
    for (std::size_t m = 0; m < methods; ++m) {
      std::vector<double> v(dim_, 0.0);
      for (std::size_t k = 0; k < refs; ++k) v[axes_[m][k]] = as_float(coeff[m][k]);
      for (std::size_t p = refs; p < dim_; ++p) v[p] = as_float(rng_.uniform(0.0, 0.05));
      draft.vectors.emplace_back(std::move(v));
    }
    return draft;
  }

  bool accept(std::size_t q, const Draft& draft) const {
    const RefId truth(static_cast<std::uint32_t>(q));
    const QueryId only(0);
    std::vector<std::vector<MethodHandle>> methods;
    for (std::size_t m = 0; m < spec_.method_count; ++m) {
      methods.push_back({make_feature_method(references_[m], {draft.vectors[m]},
                                             DistanceMetric::kEuclidean)});
    }
    const CandidateSet everything = CandidateSet::all(spec_.reference_count);
    for (const auto& tier : methods) {
      const auto scores = min_max_normalize(tier[0]->score(only, everything));
      if (!top_k(scores, kRetention).contains(truth)) return false;
    }
    const Pipeline pipeline(config_, methods, spec_.reference_count, 1);
    const MatchResult result = pipeline.run_query(only);
    if (result.combined_best != truth) return false;
    if (draft.kind == QueryCase::kHard) {
      return parallel_fusion(methods, weights_, only, spec_.reference_count).best != truth;
    }
    return true;
  }

  SyntheticSpec spec_;
  Rng rng_;
  std::size_t dim_;
  PipelineConfig config_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> axes_;
  std::vector<std::vector<FeatureVector>> references_;
};

const char* case_name(QueryCase kind) {
  switch (kind) {
    case QueryCase::kClean:
      return "clean";
    case QueryCase::kAliased:
      return "aliased";
    case QueryCase::kHard:
      return "hard";
  }
  return "?";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) fail(ErrorCategory::kIo, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<CandidateCount> default_synthetic_schedule(std::size_t method_count) {
  std::vector<CandidateCount> schedule(method_count);
  std::size_t k = 1;
  for (std::size_t i = method_count; i-- > 0;) {
    schedule[i] = k;
    k = k == 1 ? 10 : k * 5;
  }
  return schedule;
}

Dataset SyntheticBenchmark::dataset() const {
  Dataset ds;
  ds.reference_count = spec.reference_count;
  ds.query_count = spec.query_count;
  ds.ground_truth.mode = GroundTruthMode::kFrameOffset;
  ds.ground_truth.frame_tolerance = 0;
  return ds;
}

PipelineConfig SyntheticBenchmark::hierarchy_config(const fs::path& dir) const {
  return make_config(spec.method_count, dir, default_synthetic_schedule(spec.method_count));
}

PipelineConfig SyntheticBenchmark::parallel_config(const fs::path& dir) const {
  return make_config(spec.method_count, dir,
                     std::vector<CandidateCount>(spec.method_count, std::nullopt));
}

SyntheticBenchmark generate_synthetic_benchmark(const SyntheticSpec& spec) {
  if (spec.query_count == 0 || spec.reference_count < spec.query_count) {
    fail(ErrorCategory::kValidation,
         "synthetic benchmark needs references >= queries >= 1");
  }
  if (spec.method_count == 0) {
    fail(ErrorCategory::kValidation, "synthetic benchmark needs at least one method");
  }
  if (spec.method_count * spec.distractors >= spec.reference_count) {
    fail(ErrorCategory::kValidation,
         std::to_string(spec.method_count) + " methods x " +
             std::to_string(spec.distractors) + " distractors do not fit in " +
             std::to_string(spec.reference_count) + " references");
  }
  if (spec.reference_count > UINT32_MAX) {
    fail(ErrorCategory::kValidation, "too many synthetic references");
  }
  return Generator(spec).run();
}

void write_synthetic_benchmark(const SyntheticBenchmark& bench, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCategory::kIo, "cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t m = 0; m < bench.spec.method_count; ++m) {
    save_feature_file(dir / (method_name(m) + "_references.hmpf"), bench.references[m]);
    save_feature_file(dir / (method_name(m) + "_queries.hmpf"), bench.queries[m]);
  }
  save_count_manifest(dir / "manifest.json", bench.spec.reference_count,
                      bench.spec.query_count, 0);
  save_config(dir / "hierarchy.json", bench.hierarchy_config());
  save_config(dir / "parallel.json", bench.parallel_config());

  std::string csv = "query,case,method,reference\n";
  for (std::size_t q = 0; q < bench.distractors.size(); ++q) {
    for (std::size_t m = 0; m < bench.distractors[q].size(); ++m) {
      for (const RefId d : bench.distractors[q][m]) {
        csv += std::to_string(q) + "," + case_name(bench.cases[q]) + "," + method_name(m) +
               "," + std::to_string(d.index) + "\n";
      }
    }
  }
  write_text(dir / "distractors.csv", csv);
}

std::vector<FeatureVector> random_features(std::size_t count, std::size_t dim,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureVector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = as_float(rng.unit());
    out.emplace_back(std::move(v));
  }
  return out;
}

}  // namespace hmpf
