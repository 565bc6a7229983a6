#include <gtest/gtest.h>

#include <random>

#include "hmpf/scoring.hpp"
#include "test_support.hpp"

namespace hmpf {
namespace {

using testing::IdMap;
using testing::map_of;
using testing::raw_of;
using testing::scores_of;

void expect_map_near(const IdMap& got, const IdMap& want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (const auto& [id, v] : want) {
    ASSERT_TRUE(got.count(id)) << id;
    EXPECT_NEAR(got.at(id), v, tol) << "id " << id;
  }
}

TEST(CandidateSet, SortsAndDeduplicates) {
  const auto s = CandidateSet::from_unsorted({RefId(5), RefId(1), RefId(5), RefId(3)});
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], RefId(1));
  EXPECT_EQ(s[2], RefId(5));
  EXPECT_TRUE(s.contains(RefId(3)));
  EXPECT_FALSE(s.contains(RefId(4)));
  EXPECT_EQ(s.position(RefId(5)), 2u);
  EXPECT_TRUE(testing::ids_of({1, 5}).is_subset_of(s));
  EXPECT_FALSE(testing::ids_of({1, 2}).is_subset_of(s));
  EXPECT_EQ(set_union(testing::ids_of({1, 3}), testing::ids_of({3, 4})),
            testing::ids_of({1, 3, 4}));
}

TEST(RawDistances, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(make_raw_distances(testing::ids_of({0}), {-1.0}), Error);
  EXPECT_THROW(make_raw_distances(testing::ids_of({0}), {std::nan("")}), Error);
  EXPECT_NO_THROW(make_raw_distances(testing::ids_of({0}), {0.0}));
}

TEST(MinMaxNormalize, Examples) {
  expect_map_near(map_of(min_max_normalize(raw_of({{0, 3}, {1, 1}, {2, 2}}))),
                  {{0, 0}, {1, 1}, {2, 0.5}});
  expect_map_near(map_of(min_max_normalize(raw_of({{0, 5}, {1, 5}, {2, 5}}))),
                  {{0, 1}, {1, 1}, {2, 1}});
  expect_map_near(map_of(min_max_normalize(raw_of({{0, 7}}))), {{0, 1}});
}

TEST(MinMaxNormalize, EmptyIsAnError) {
  try {
    min_max_normalize(RawDistances());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kValidation);
  }
}

TEST(MinMaxNormalize, ReversesOrderAndHitsBothEnds) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    IdMap raw;
    for (std::uint32_t i = 0; i < 12; ++i) raw[i] = u(rng);
    const IdMap norm = map_of(min_max_normalize(raw_of(raw)));
    double lo = 2, hi = -1;
    for (const auto& [i, v] : norm) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      for (const auto& [j, w] : norm) {
        if (raw[i] < raw[j]) EXPECT_GT(v, w);
      }
    }
    EXPECT_EQ(lo, 0.0);
    EXPECT_EQ(hi, 1.0);
  }
}

TEST(Renormalize, Examples) {
  expect_map_near(map_of(renormalize_01(scores_of({{0, 0.2}, {1, 0.6}, {2, 1.0}}))),
                  {{0, 0}, {1, 0.5}, {2, 1}});
  expect_map_near(map_of(renormalize_01(scores_of({{0, 0.4}}))), {{0, 1}});
  EXPECT_THROW(renormalize_01(NormalizedScores()), Error);
}

TEST(Renormalize, IdempotentAndOrderPreserving) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    IdMap s;
    for (std::uint32_t i = 0; i < 9; ++i) s[i] = u(rng);
    const auto once = renormalize_01(scores_of(s));
    const auto twice = renormalize_01(once);
    expect_map_near(map_of(twice), map_of(once), 1e-15);
    const IdMap r = map_of(once);
    for (const auto& [i, v] : s) {
      for (const auto& [j, w] : s) {
        if (v < w) EXPECT_LT(r.at(i), r.at(j));
      }
    }
  }
}

TEST(Standardize, Examples) {
  expect_map_near(map_of(standardize(scores_of<FusedKind>({{0, 1}, {1, 2}, {2, 3}}))),
                  {{0, -1}, {1, 0}, {2, 1}});
  expect_map_near(map_of(standardize(scores_of<FusedKind>({{0, 4}, {1, 4}}))),
                  {{0, 0}, {1, 0}});
  expect_map_near(map_of(standardize(scores_of<FusedKind>({{3, 9.5}}))), {{3, 0}});
}

TEST(Standardize, ZeroMeanUnitSampleDeviation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    IdMap s;
    for (std::uint32_t i = 0; i < 7; ++i) s[i] = u(rng);
    const auto z = standardize(scores_of<FusedKind>(s));
    double mean = 0, ss = 0;
    for (const double v : z.values()) mean += v;
    mean /= 7;
    for (const double v : z.values()) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(ss / 6), 1.0, 1e-9);
  }
}

TEST(Standardize, PreservesArgmaxAndArgminSets) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 1000; ++trial) {
    IdMap s;
    for (std::uint32_t i = 0; i < 6; ++i) s[i] = level(rng) * 0.25;
    const IdMap z = map_of(standardize(scores_of<FusedKind>(s)));
    const double smax = std::max_element(s.begin(), s.end(), [](auto a, auto b) {
                          return a.second < b.second;
                        })->second;
    const double smin = std::min_element(s.begin(), s.end(), [](auto a, auto b) {
                          return a.second < b.second;
                        })->second;
    const double zmax = std::max_element(z.begin(), z.end(), [](auto a, auto b) {
                          return a.second < b.second;
                        })->second;
    const double zmin = std::min_element(z.begin(), z.end(), [](auto a, auto b) {
                          return a.second < b.second;
                        })->second;
    for (const auto& [id, v] : s) {
      EXPECT_EQ(v == smax, z.at(id) == zmax);
      EXPECT_EQ(v == smin, z.at(id) == zmin);
    }
  }
}

TEST(Transforms, ArgmaxInvariantUnderPositiveAffineRescaling) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_real_distribution<double> scale(0.1, 20.0);
  for (int trial = 0; trial < 300; ++trial) {
    IdMap s, t;
    const double a = scale(rng), b = u(rng);
    for (std::uint32_t i = 0; i < 8; ++i) {
      s[i] = u(rng);
      t[i] = a * s[i] + b;
    }
    EXPECT_EQ(argmax(min_max_normalize(raw_of(s))), argmax(min_max_normalize(raw_of(t))));
    EXPECT_EQ(argmax(standardize(scores_of<FusedKind>(s))),
              argmax(standardize(scores_of<FusedKind>(t))));
    IdMap s01 = map_of(min_max_normalize(raw_of(s)));
    IdMap t01;
    for (const auto& [id, v] : s01) t01[id] = 0.5 * v + 0.25;
    EXPECT_EQ(argmax(renormalize_01(scores_of(s01))), argmax(renormalize_01(scores_of(t01))));
  }
}

TEST(TierMax, Examples) {
  const std::vector<NormalizedScores> two = {scores_of({{0, 1}, {1, 0}}),
                                             scores_of({{0, 0.3}, {1, 0.9}})};
  expect_map_near(map_of(tier_max_across_methods(two)), {{0, 1}, {1, 0.9}});
  const std::vector<NormalizedScores> one = {scores_of({{2, 0.4}, {7, 0.1}})};
  expect_map_near(map_of(tier_max_across_methods(one)), {{2, 0.4}, {7, 0.1}});
}

TEST(TierMax, KeySetMismatchIsAnError) {
  const std::vector<NormalizedScores> bad = {scores_of({{0, 1}, {1, 0}}),
                                             scores_of({{0, 0.3}, {2, 0.9}})};
  try {
    tier_max_across_methods(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kMismatch);
  }
  EXPECT_THROW(tier_max_across_methods({}), Error);
}

TEST(TierMax, CommutesWithMethodOrder) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<NormalizedScores> methods;
    for (int m = 0; m < 3; ++m) {
      IdMap s;
      for (std::uint32_t i = 0; i < 5; ++i) s[i] = u(rng);
      methods.push_back(scores_of(s));
    }
    const auto base = tier_max_across_methods(methods);
    std::vector<NormalizedScores> shuffled = {methods[2], methods[0], methods[1]};
    EXPECT_EQ(base, tier_max_across_methods(shuffled));
  }
}

TEST(RestrictTo, MissingIdIsInternal) {
  const auto s = scores_of({{1, 0.5}, {2, 0.25}});
  EXPECT_EQ(map_of(restrict_to(s, testing::ids_of({2}))), (IdMap{{2, 0.25}}));
  try {
    restrict_to(s, testing::ids_of({3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kInternal);
  }
}

TEST(Argmax, TiesGoToLowerId) {
  EXPECT_EQ(argmax(scores_of({{4, 0.7}, {2, 0.7}, {9, 0.1}})), RefId(2));
  const auto ranked = rank_descending(scores_of({{0, 0.5}, {1, 0.9}, {2, 0.5}}));
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0], RefId(1));
  EXPECT_EQ(ranked[1], RefId(0));
  EXPECT_EQ(ranked[2], RefId(2));
}

}  // namespace
}  // namespace hmpf
