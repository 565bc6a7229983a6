#pragma once

// Shared helpers and library-independent reference computations for tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hmpf/types.hpp"

namespace hmpf::testing {

using IdMap = std::map<std::uint32_t, double>;

template <typename Kind = NormalizedKind>
ScoreVector<Kind> scores_of(const IdMap& m) {
  std::vector<RefId> ids;
  std::vector<double> values;
  for (const auto& [id, v] : m) {
    ids.emplace_back(id);
    values.push_back(v);
  }
  return ScoreVector<Kind>(CandidateSet::from_unsorted(ids), values);
}

inline RawDistances raw_of(const IdMap& m) { return scores_of<RawKind>(m); }

template <typename Kind>
IdMap map_of(const ScoreVector<Kind>& s) {
  IdMap out;
  for (std::size_t i = 0; i < s.size(); ++i) out[s.id(i).index] = s.value(i);
  return out;
}

inline CandidateSet ids_of(std::initializer_list<std::uint32_t> ids) {
  std::vector<RefId> v;
  for (const auto i : ids) v.emplace_back(i);
  return CandidateSet::from_unsorted(v);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("hmpf_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

// Category of the Error thrown by `fn`; records a failure if nothing is thrown.
inline ErrorCategory category_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCategory::kInternal;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// ---- reference computations -------------------------------------------

// Lowest id among the maxima.
inline std::uint32_t ref_argmax(const IdMap& m) {
  std::uint32_t best = m.begin()->first;
  for (const auto& [id, v] : m) {
    if (v > m.at(best)) best = id;
  }
  return best;
}

// tiers[t][m]: method m's normalized scores in tier t.
struct RefCombined {
  IdMap fused;
  IdMap standardized;
  std::uint32_t best = 0;
};

inline RefCombined ref_combined(const std::vector<std::vector<IdMap>>& tiers,
                                const std::vector<double>& weights) {
  const auto& last = tiers.back();
  RefCombined r;
  for (const auto& [id, v] : last.front()) r.fused[id] = 0.0;
  for (std::size_t t = 0; t + 1 < tiers.size(); ++t) {
    IdMap best;
    for (const auto& [id, unused] : r.fused) {
      double m = -1.0;
      for (const auto& method : tiers[t]) m = std::max(m, method.at(id));
      best[id] = m;
    }
    double lo = 1e300, hi = -1e300;
    for (const auto& [id, v] : best) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (auto& [id, v] : r.fused) {
      const double rescaled = hi > lo ? (best[id] - lo) / (hi - lo) : 1.0;
      v += weights[t] * rescaled;
    }
  }
  for (auto& [id, v] : r.fused) {
    double sum = 0.0;
    for (const auto& method : last) sum += method.at(id);
    v += weights.back() * sum / static_cast<double>(last.size());
  }
  double mean = 0.0;
  for (const auto& [id, v] : r.fused) mean += v;
  mean /= static_cast<double>(r.fused.size());
  double ss = 0.0;
  for (const auto& [id, v] : r.fused) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(r.fused.size());
  const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  for (const auto& [id, v] : r.fused) r.standardized[id] = sd > 0 ? (v - mean) / sd : v - mean;
  r.best = ref_argmax(r.standardized);
  return r;
}

inline double ref_euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace hmpf::testing
