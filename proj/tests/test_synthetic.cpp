#include <gtest/gtest.h>

#include "hmpf/evaluation.hpp"
#include "hmpf/synthetic.hpp"
#include "test_support.hpp"

namespace hmpf {
namespace {

using testing::category_of;
using testing::TempDir;

std::vector<std::vector<MethodHandle>> handles(const SyntheticBenchmark& b) {
  std::vector<std::vector<MethodHandle>> out;
  for (std::size_t m = 0; m < b.spec.method_count; ++m) {
    out.push_back({make_feature_method(b.references[m], b.queries[m],
                                       DistanceMetric::kEuclidean)});
  }
  return out;
}

ExperimentReport evaluate(const SyntheticBenchmark& b, const PipelineConfig& config) {
  const Pipeline p(config, handles(b), b.spec.reference_count, b.spec.query_count);
  const auto results = run_all_queries(p, 2);
  return summarize(p, results, GroundTruthOracle(b.dataset()), "synthetic");
}

TEST(Synthetic, DefaultSchedule) {
  EXPECT_EQ(default_synthetic_schedule(3), (std::vector<CandidateCount>{50, 10, 1}));
  EXPECT_EQ(default_synthetic_schedule(1), (std::vector<CandidateCount>{1}));
  EXPECT_EQ(default_synthetic_schedule(4), (std::vector<CandidateCount>{250, 50, 10, 1}));
}

TEST(Synthetic, RerunsAreByteIdentical) {
  TempDir a, b;
  write_synthetic_benchmark(generate_synthetic_benchmark({}), a.path());
  write_synthetic_benchmark(generate_synthetic_benchmark({}), b.path());
  for (const char* f : {"manifest.json", "hierarchy.json", "parallel.json", "distractors.csv",
                        "m1_references.hmpf", "m2_queries.hmpf", "m3_references.hmpf"}) {
    const auto x = testing::read_file(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, testing::read_file(b / f)) << f;
  }
  SyntheticSpec other;
  other.seed = 43;
  TempDir c;
  write_synthetic_benchmark(generate_synthetic_benchmark(other), c.path());
  EXPECT_NE(testing::read_file(a / "m1_queries.hmpf"), testing::read_file(c / "m1_queries.hmpf"));
}

TEST(Synthetic, NoDistractorsMeansEveryMethodIsPerfect) {
  SyntheticSpec spec;
  spec.distractors = 0;
  const auto bench = generate_synthetic_benchmark(spec);
  for (const auto c : bench.cases) EXPECT_EQ(c, QueryCase::kClean);
  const auto report = evaluate(bench, bench.parallel_config());
  for (const auto& m : report.method_recalls) EXPECT_EQ(m.recall_at_1, 1.0) << m.method;
  EXPECT_EQ(report.final_recall_at_1, 1.0);
}

TEST(Synthetic, DefaultInstanceProperties) {
  const auto bench = generate_synthetic_benchmark({});
  ASSERT_EQ(bench.references.size(), 3u);
  ASSERT_EQ(bench.cases.size(), 50u);
  EXPECT_EQ(bench.references[0].front().dim(), 54u);

  // Each method is fooled somewhere, but never drops the truth from its top 10.
  const auto parallel = evaluate(bench, bench.parallel_config());
  for (const auto& m : parallel.method_recalls) EXPECT_LT(m.recall_at_1, 1.0) << m.method;
  for (std::size_t m = 0; m < 3; ++m) {
    const auto method = make_feature_method(bench.references[m], bench.queries[m],
                                            DistanceMetric::kEuclidean);
    for (std::uint32_t q = 0; q < 50; ++q) {
      const auto raw = method->score(QueryId(q), CandidateSet::all(50));
      std::vector<std::pair<double, std::uint32_t>> order;
      for (std::size_t i = 0; i < raw.size(); ++i) order.push_back({raw.value(i), raw.id(i).index});
      std::sort(order.begin(), order.end());
      bool found = false;
      for (std::size_t i = 0; i < 10; ++i) found |= order[i].second == q;
      EXPECT_TRUE(found) << "method " << m << " query " << q;
    }
  }

  // Distractor sets of different methods never overlap.
  for (const auto& per_query : bench.distractors) {
    std::vector<RefId> all;
    for (const auto& d : per_query) all.insert(all.end(), d.begin(), d.end());
    EXPECT_EQ(CandidateSet::from_unsorted(all).size(), all.size());
  }
}

TEST(Synthetic, HierarchyBeatsParallelFusion) {
  const auto bench = generate_synthetic_benchmark({});
  const auto hierarchy = evaluate(bench, bench.hierarchy_config());
  const auto parallel = evaluate(bench, bench.parallel_config());
  ASSERT_TRUE(hierarchy.combined_recall_at_1 && parallel.combined_recall_at_1);
  EXPECT_EQ(*hierarchy.combined_recall_at_1, 1.0);
  EXPECT_GE(*hierarchy.combined_recall_at_1, *parallel.combined_recall_at_1);
  const bool any_hard = std::count(bench.cases.begin(), bench.cases.end(), QueryCase::kHard) > 0;
  if (any_hard) EXPECT_GT(*hierarchy.combined_recall_at_1, *parallel.combined_recall_at_1);
}

TEST(Synthetic, InvalidSpecs) {
  SyntheticSpec crowded;
  crowded.distractors = 20;
  EXPECT_EQ(category_of([&] { generate_synthetic_benchmark(crowded); }),
            ErrorCategory::kValidation);
  SyntheticSpec few;
  few.reference_count = 10;
  few.query_count = 11;
  few.distractors = 1;
  EXPECT_EQ(category_of([&] { generate_synthetic_benchmark(few); }), ErrorCategory::kValidation);
  SyntheticSpec none;
  none.method_count = 0;
  EXPECT_EQ(category_of([&] { generate_synthetic_benchmark(none); }), ErrorCategory::kValidation);
}

TEST(Synthetic, RandomFeaturesAreReproducible) {
  const auto a = random_features(4, 3, 9);
  EXPECT_EQ(a, random_features(4, 3, 9));
  EXPECT_NE(a, random_features(4, 3, 10));
  for (const auto& v : a) {
    for (const double x : v.values()) {
      EXPECT_GE(x, 0.0);
      EXPECT_LT(x, 1.0);
      EXPECT_EQ(x, static_cast<double>(static_cast<float>(x)));
    }
  }
}

}  // namespace
}  // namespace hmpf
