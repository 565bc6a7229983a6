#include <gtest/gtest.h>

#include <random>

#include "hmpf/feature_file.hpp"
#include "hmpf/pipeline.hpp"
#include "hmpf/scoring.hpp"
#include "hmpf/synthetic.hpp"
#include "test_support.hpp"

namespace hmpf {
namespace {

using testing::IdMap;
using testing::ids_of;
using testing::map_of;
using testing::scores_of;

MethodHandle matrix_method(std::vector<std::vector<double>> rows) {
  const std::size_t cols = rows.front().size();
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return make_score_matrix_method(ScoreMatrix(rows.size(), cols, flat));
}

TierSpec tier_of(std::size_t methods, CandidateCount k, double weight = 1.0) {
  TierSpec t;
  for (std::size_t m = 0; m < methods; ++m) {
    t.methods.push_back(MethodSpec{"m" + std::to_string(m + 1), PrecomputedScoreParams{}});
  }
  t.k_out = k;
  t.weight = weight;
  return t;
}

TEST(TopK, Examples) {
  const auto s = scores_of({{0, 0.1}, {1, 1.0}, {2, 0.5}, {3, 0.8}, {4, 0.3}});
  EXPECT_EQ(top_k(s, 2), ids_of({1, 3}));
  EXPECT_EQ(top_k(s, 10), ids_of({0, 1, 2, 3, 4}));
  EXPECT_EQ(top_k(s, std::nullopt), s.ids());
  EXPECT_EQ(top_k(scores_of({{0, 0.7}, {1, 0.7}, {2, 0.1}}), 1), ids_of({0}));
}

TEST(TopK, TieBreakingIsDeterministicOverRandomCases) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> level(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    IdMap m;
    for (std::uint32_t i = 0; i < 10; ++i) m[i * 3] = level(rng) / 3.0;
    const std::size_t k = 1 + trial % 9;
    const CandidateSet got = top_k(scores_of(m), k);
    std::vector<std::pair<double, std::uint32_t>> order;
    for (const auto& [id, v] : m) order.push_back({-v, id});
    std::sort(order.begin(), order.end());
    std::vector<RefId> want;
    for (std::size_t i = 0; i < k; ++i) want.emplace_back(order[i].second);
    EXPECT_EQ(got, CandidateSet::from_unsorted(want));
  }
}

TEST(RunTier, SingleMethodHandEnumeration) {
  const std::vector<MethodHandle> methods = {matrix_method({{0.9, 0.1, 0.5, 0.3, 0.7}})};
  const TierRecord r = run_tier(0, tier_of(1, 2), methods, QueryId(0), CandidateSet::all(5));
  EXPECT_EQ(r.selected, ids_of({1, 3}));
  EXPECT_EQ(r.evaluated, CandidateSet::all(5));
  const IdMap norm = map_of(r.per_method_scores[0]);
  EXPECT_NEAR(norm.at(1), 1.0, 1e-12);
  EXPECT_NEAR(norm.at(0), 0.0, 1e-12);
  EXPECT_NEAR(norm.at(3), 0.75, 1e-12);
}

TEST(RunTier, SelectionIsTheUnionOfMethodTopSets) {
  const std::vector<MethodHandle> methods = {
      matrix_method({{0.9, 0.1, 0.5, 0.3, 0.7}}),   // top-2 {1, 3}
      matrix_method({{0.9, 0.8, 0.7, 0.1, 0.2}})};  // top-2 {3, 4}
  const TierRecord r = run_tier(0, tier_of(2, 2), methods, QueryId(0), CandidateSet::all(5));
  EXPECT_EQ(r.selected, ids_of({1, 3, 4}));
}

TEST(RunTier, LargeKForwardsEverything) {
  const std::vector<MethodHandle> methods = {matrix_method({{0.9, 0.1, 0.5, 0.3, 0.7}}),
                                             matrix_method({{0.2, 0.4, 0.6, 0.8, 1.0}})};
  const auto in = ids_of({0, 2, 4});
  const TierRecord r = run_tier(1, tier_of(2, 3), methods, QueryId(0), in);
  EXPECT_EQ(r.selected, in);
  EXPECT_EQ(r.per_method_scores[0].ids(), in);
}

class FailingMethod final : public ScoringMethod {
 public:
  RawDistances score(QueryId, const CandidateSet&) const override {
    fail(ErrorCategory::kIo, "cannot read features");
  }
};

TEST(RunTier, MethodFailureNamesTheMethod) {
  TierSpec spec = tier_of(1, 1);
  spec.methods[0].name = "netvlad";
  const std::vector<MethodHandle> methods = {std::make_shared<FailingMethod>()};
  try {
    run_tier(0, spec, methods, QueryId(3), CandidateSet::all(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kIo);
    EXPECT_NE(std::string(e.what()).find("netvlad"), std::string::npos);
  }
}

TierRecord record_of(std::vector<IdMap> methods, CandidateSet selected = {}) {
  TierRecord r;
  r.evaluated = scores_of(methods.front()).ids();
  for (const auto& m : methods) r.per_method_scores.push_back(scores_of(m));
  r.selected = selected.empty() ? r.evaluated : selected;
  return r;
}

TEST(ValidateTierRecord, CatchesKeyMismatchAndForeignSelection) {
  TierRecord ok = record_of({{{1, 0.5}, {2, 1.0}}});
  EXPECT_NO_THROW(validate_tier_record(ok));
  TierRecord mismatch = record_of({{{1, 0.5}, {2, 1.0}}, {{1, 0.5}, {3, 1.0}}});
  EXPECT_THROW(validate_tier_record(mismatch), Error);
  TierRecord foreign = ok;
  foreign.selected = ids_of({7});
  EXPECT_THROW(validate_tier_record(foreign), Error);
}

TEST(FinalTier, Examples) {
  const auto d = final_tier_decision(
      record_of({{{2, 1}, {5, 0}, {9, 0.5}}, {{2, 0.4}, {5, 1}, {9, 0}}}));
  EXPECT_EQ(d.best, RefId(2));
  const IdMap mean = map_of(d.mean_scores);
  EXPECT_NEAR(mean.at(2), 0.7, 1e-12);
  EXPECT_NEAR(mean.at(5), 0.5, 1e-12);
  EXPECT_NEAR(mean.at(9), 0.25, 1e-12);

  const IdMap single = {{1, 0.3}, {4, 0.9}};
  EXPECT_EQ(map_of(final_tier_decision(record_of({single})).mean_scores), single);

  EXPECT_EQ(final_tier_decision(record_of({{{3, 0.5}, {6, 0.5}, {8, 0.5}}})).best, RefId(3));
}

std::vector<TierRecord> hand_built_records() {
  return {
      record_of({{{1, 0.9}, {2, 0.2}, {4, 1.0}, {5, 0.6}, {9, 0.0}},
                 {{1, 0.0}, {2, 0.7}, {4, 0.3}, {5, 1.0}, {9, 0.45}}},
                ids_of({2, 4, 5, 9})),
      record_of({{{2, 0.5}, {4, 0.0}, {5, 1.0}, {9, 0.8}},
                 {{2, 0.25}, {4, 1.0}, {5, 0.9}, {9, 0.0}}},
                ids_of({2, 5, 9})),
      record_of({{{2, 0.2}, {5, 1.0}, {9, 0.6}}, {{2, 1.0}, {5, 0.0}, {9, 0.0}}}),
  };
}

TEST(Combined, MatchesFrozenStepByStepEvaluation) {
  // Values from tests/oracles/combined_example.py.
  const auto records = hand_built_records();
  const std::vector<double> weights = {0.5, 0.75, 1.0};
  const CombinedDecision d = combined_score(records, weights);
  const IdMap fused = map_of(d.fused);
  EXPECT_NEAR(fused.at(2), 0.8272727272727272, 1e-12);
  EXPECT_NEAR(fused.at(5), 1.75, 1e-12);
  EXPECT_NEAR(fused.at(9), 0.75, 1e-12);
  const IdMap z = map_of(d.standardized);
  EXPECT_NEAR(z.at(2), -0.506514986704234, 1e-12);
  EXPECT_NEAR(z.at(5), 1.1519131149241444, 1e-12);
  EXPECT_NEAR(z.at(9), -0.6453981282199107, 1e-12);
  EXPECT_EQ(d.best, RefId(5));
  EXPECT_EQ(final_tier_decision(records.back()).best, RefId(2));
}

TEST(Combined, FinalOnlyWeightsReproduceFinalDecision) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TierRecord> records;
    for (int t = 0; t < 3; ++t) {
      std::vector<IdMap> methods(2);
      for (auto& m : methods) {
        for (std::uint32_t id = 0; id < 6; ++id) m[id] = u(rng);
      }
      records.push_back(record_of(methods));
    }
    const std::vector<double> w = {0, 0, 1};
    EXPECT_EQ(combined_score(records, w).best, final_tier_decision(records.back()).best);
  }
}

TEST(Combined, DoublingWeightsKeepsArgmax) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TierRecord> records;
    for (int t = 0; t < 3; ++t) {
      std::vector<IdMap> methods(1 + trial % 3);
      for (auto& m : methods) {
        for (std::uint32_t id = 0; id < 5; ++id) m[id] = u(rng);
      }
      records.push_back(record_of(methods));
    }
    const std::vector<double> w = {0.5, 0.75, 1.0};
    const std::vector<double> w2 = {1.0, 1.5, 2.0};
    const auto a = combined_score(records, w);
    const auto b = combined_score(records, w2);
    EXPECT_EQ(a.best, b.best);
    for (std::size_t i = 0; i < a.standardized.size(); ++i) {
      EXPECT_NEAR(a.standardized.value(i), b.standardized.value(i), 1e-9);
    }
  }
}

TEST(Combined, NestingViolationIsInternal) {
  auto records = hand_built_records();
  records[0] = record_of({{{1, 0.9}, {2, 0.2}}});
  try {
    combined_score(records, std::vector<double>{0.5, 0.75, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kInternal);
  }
}

PipelineConfig feature_config(std::vector<std::size_t> methods_per_tier,
                              std::vector<CandidateCount> ks) {
  PipelineConfig c;
  const auto weights = default_tier_weights(ks.size());
  for (std::size_t t = 0; t < ks.size(); ++t) {
    c.tiers.push_back(tier_of(methods_per_tier[t], ks[t], weights[t]));
  }
  return c;
}

TEST(Pipeline, SingleTierNearestNeighbourMatchesBruteForce) {
  const auto refs = random_features(50, 16, 1);
  const auto queries = random_features(50, 16, 2);
  const Pipeline p(feature_config({1}, {1}),
                   {{make_feature_method(refs, queries, DistanceMetric::kEuclidean)}}, 50, 50);
  for (std::uint32_t q = 0; q < 50; ++q) {
    std::uint32_t best = 0;
    double best_d = 1e300;
    for (std::uint32_t r = 0; r < 50; ++r) {
      const double d = testing::ref_euclidean(queries[q].values(), refs[r].values());
      if (d < best_d) {
        best_d = d;
        best = r;
      }
    }
    EXPECT_EQ(p.run_query(QueryId(q)).final_tier_best, RefId(best)) << "query " << q;
  }
}

std::vector<std::vector<MethodHandle>> random_methods(std::vector<std::size_t> per_tier,
                                                      std::size_t refs, std::size_t queries,
                                                      std::uint64_t seed) {
  std::vector<std::vector<MethodHandle>> out;
  for (const std::size_t n : per_tier) {
    auto& tier = out.emplace_back();
    for (std::size_t m = 0; m < n; ++m) {
      tier.push_back(make_feature_method(random_features(refs, 8, seed),
                                         random_features(queries, 8, seed + 1000),
                                         DistanceMetric::kEuclidean));
      ++seed;
    }
  }
  return out;
}

TEST(Pipeline, HundredTenOneScheduleBoundsTierInputs) {
  const Pipeline p(feature_config({2, 2, 2}, {100, 10, 1}),
                   random_methods({2, 2, 2}, 400, 20, 5), 400, 20);
  for (std::uint32_t q = 0; q < 20; ++q) {
    const MatchResult r = p.run_query(QueryId(q));
    EXPECT_EQ(r.tier_records[0].evaluated.size(), 400u);
    EXPECT_LE(r.tier_records[1].evaluated.size(), 200u);
    EXPECT_GE(r.tier_records[1].evaluated.size(), 100u);
    EXPECT_LE(r.tier_records[2].evaluated.size(), 20u);
    EXPECT_TRUE(r.tier_records[2].evaluated.contains(r.final_tier_best));
    ASSERT_TRUE(r.combined_best.has_value());
    EXPECT_EQ(r.tier_seconds.size(), 3u);
  }
}

TEST(Pipeline, AllCandidatesEverywhereEqualsParallelFusion) {
  const auto methods = random_methods({2, 1, 2}, 60, 15, 31);
  const PipelineConfig c = feature_config({2, 1, 2}, {60, std::nullopt, std::nullopt});
  const Pipeline p(c, methods, 60, 15);
  for (std::uint32_t q = 0; q < 15; ++q) {
    const MatchResult r = p.run_query(QueryId(q));
    const auto par = parallel_fusion(methods, c.weights(), QueryId(q), 60);
    const auto hier = combined_score(r.tier_records, c.weights());
    EXPECT_EQ(*r.combined_best, par.best);
    for (std::size_t i = 0; i < 60; ++i) {
      EXPECT_NEAR(hier.standardized.value(i), par.standardized.value(i), 1e-12);
    }
  }
}

TEST(Pipeline, CandidatesNestAcrossTiers) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t refs = 20 + rng() % 40;
    const std::vector<std::size_t> per_tier = {1 + rng() % 2, 1 + rng() % 2, 1 + rng() % 2};
    const std::size_t k1 = 5 + rng() % 15;
    const std::size_t k2 = 1 + rng() % (k1 - 1);
    const Pipeline p(feature_config(per_tier, {k1, k2, std::nullopt}),
                     random_methods(per_tier, refs, 1, 5000 + trial), refs, 1);
    const MatchResult r = p.run_query(QueryId(0));
    for (std::size_t t = 0; t + 1 < r.tier_records.size(); ++t) {
      const auto& cur = r.tier_records[t];
      const auto& next = r.tier_records[t + 1];
      ASSERT_TRUE(next.evaluated.is_subset_of(cur.evaluated));
      ASSERT_EQ(next.evaluated, cur.selected);
      ASSERT_LE(next.evaluated.size(), cur.evaluated.size());
    }
  }
}

TEST(Pipeline, DeterministicBitForBit) {
  const auto methods = random_methods({2, 2, 1}, 80, 10, 9);
  const Pipeline p(feature_config({2, 2, 1}, {30, 8, 1}), methods, 80, 10);
  for (std::uint32_t q = 0; q < 10; ++q) {
    const MatchResult a = p.run_query(QueryId(q));
    const MatchResult b = p.run_query(QueryId(q));
    EXPECT_EQ(a.final_tier_best, b.final_tier_best);
    EXPECT_EQ(a.combined_best, b.combined_best);
    ASSERT_EQ(a.tier_records.size(), b.tier_records.size());
    for (std::size_t t = 0; t < a.tier_records.size(); ++t) {
      EXPECT_EQ(a.tier_records[t].per_method_scores, b.tier_records[t].per_method_scores);
      EXPECT_EQ(a.tier_records[t].selected, b.tier_records[t].selected);
    }
  }
}

TEST(Pipeline, FinalBestInvariantUnderAffineRawDistances) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t refs = 30, queries = 4;
    std::vector<std::vector<double>> a(queries, std::vector<double>(refs));
    std::vector<std::vector<double>> b = a;
    std::vector<std::vector<double>> other = a;
    const double scale = 0.5 + u(rng), shift = u(rng);
    for (std::size_t q = 0; q < queries; ++q) {
      for (std::size_t r = 0; r < refs; ++r) {
        a[q][r] = u(rng);
        b[q][r] = scale * a[q][r] + shift;
        other[q][r] = u(rng);
      }
    }
    const PipelineConfig c = feature_config({2, 2}, {8, 1});
    const Pipeline pa(c, {{matrix_method(a), matrix_method(other)},
                          {matrix_method(other), matrix_method(a)}},
                      refs, queries);
    const Pipeline pb(c, {{matrix_method(b), matrix_method(other)},
                          {matrix_method(other), matrix_method(b)}},
                      refs, queries);
    for (std::uint32_t q = 0; q < queries; ++q) {
      EXPECT_EQ(pa.run_query(QueryId(q)).final_tier_best,
                pb.run_query(QueryId(q)).final_tier_best);
    }
  }
}

TEST(Pipeline, ReplicatedSingleMethodFindsItsGlobalArgmax) {
  const auto refs = random_features(120, 8, 40);
  const auto queries = random_features(25, 8, 41);
  const MethodHandle m = make_feature_method(refs, queries, DistanceMetric::kEuclidean);
  const Pipeline p(feature_config({1, 1, 1}, {40, 5, 1}), {{m}, {m}, {m}}, 120, 25);
  const CandidateSet all = CandidateSet::all(120);
  for (std::uint32_t q = 0; q < 25; ++q) {
    const RefId global = argmax(min_max_normalize(m->score(QueryId(q), all)));
    const MatchResult r = p.run_query(QueryId(q));
    EXPECT_EQ(r.final_tier_best, global);
    EXPECT_EQ(*r.combined_best, global);
  }
}

TEST(Pipeline, CombinedDisabledLeavesNoCombinedBest) {
  PipelineConfig c = feature_config({1}, {1});
  c.combined_enabled = false;
  const Pipeline p(c, random_methods({1}, 10, 2, 3), 10, 2);
  EXPECT_FALSE(p.run_query(QueryId(1)).combined_best.has_value());
  EXPECT_THROW(p.run_query(QueryId(2)), Error);
}

TEST(Pipeline, ShapeMismatchIsRejected) {
  EXPECT_THROW(Pipeline(feature_config({2}, {1}), random_methods({1}, 10, 2, 3), 10, 2), Error);
}

TEST(BindMethod, FeatureCountMismatchNamesBothCounts) {
  testing::TempDir dir;
  save_feature_file(dir / "r.hmpf", random_features(7, 4, 1));
  save_feature_file(dir / "q.hmpf", random_features(5, 4, 2));
  Dataset ds;
  ds.reference_count = 8;
  ds.query_count = 5;
  PrecomputedFeatureParams params;
  params.reference_features = dir / "r.hmpf";
  params.query_features = dir / "q.hmpf";
  try {
    bind_method(MethodSpec{"deep", params}, ds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kMismatch);
    const std::string msg = e.what();
    EXPECT_NE(msg.find('7'), std::string::npos);
    EXPECT_NE(msg.find('8'), std::string::npos);
  }
}

TEST(BindMethod, ImageMethodsNeedImageLists) {
  Dataset ds;
  ds.reference_count = 3;
  ds.query_count = 3;
  EXPECT_THROW(bind_method(MethodSpec{"hog", HogMethodParams{}}, ds), Error);
}

}  // namespace
}  // namespace hmpf
