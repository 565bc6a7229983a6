#include "hmpf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hmpf {
namespace {

using nlohmann::json;

constexpr std::string_view kKindNames[] = {
    "hog", "gist", "local-features", "precomputed-features", "precomputed-scores"};

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  fail(ErrorCategory::kParse, "config " + where + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) parse_fail(where, "unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    parse_fail(where, std::string("field '") + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

std::string required_string(const json& obj, const char* key,
                            const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    parse_fail(where, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

MethodSpec parse_method(const json& m, const std::filesystem::path& base,
                        const std::string& where) {
  if (!m.is_object()) parse_fail(where, "method must be an object");
  const auto kind_it = m.find("kind");
  if (kind_it == m.end() || !kind_it->is_string()) {
    parse_fail(where, "method needs a string 'kind'");
  }
  const MethodKind kind = parse_kind(kind_it->get<std::string>());
  MethodSpec spec;
  spec.name = get_or<std::string>(m, "name", std::string(kind_name(kind)), where);
  const auto metric = [&] {
    return parse_metric(get_or<std::string>(m, "metric", "euclidean", where));
  };
  switch (kind) {
    case MethodKind::kHog: {
      reject_unknown_keys(m, {"kind", "name", "cell_px", "resize_px", "epsilon", "metric"},
                          where);
      HogMethodParams p;
      p.hog.cell_px = get_or<int>(m, "cell_px", p.hog.cell_px, where);
      p.hog.resize_px = get_or<int>(m, "resize_px", p.hog.resize_px, where);
      p.hog.epsilon = get_or<double>(m, "epsilon", p.hog.epsilon, where);
      p.metric = metric();
      spec.params = p;
      break;
    }
    case MethodKind::kGist: {
      reject_unknown_keys(m, {"kind", "name", "metric"}, where);
      spec.params = GistMethodParams{metric()};
      break;
    }
    case MethodKind::kLocalFeatures: {
      reject_unknown_keys(m,
                          {"kind", "name", "match_threshold", "max_ratio", "top_n",
                           "max_keypoints"},
                          where);
      LocalFeatureMethodParams p;
      p.filter.match_threshold =
          get_or<double>(m, "match_threshold", p.filter.match_threshold, where);
      p.filter.max_ratio = get_or<double>(m, "max_ratio", p.filter.max_ratio, where);
      p.filter.top_n = get_or<int>(m, "top_n", p.filter.top_n, where);
      p.max_keypoints = get_or<int>(m, "max_keypoints", p.max_keypoints, where);
      spec.params = p;
      break;
    }
    case MethodKind::kPrecomputedFeatures: {
      reject_unknown_keys(
          m, {"kind", "name", "reference_features", "query_features", "metric"}, where);
      PrecomputedFeatureParams p;
      p.reference_features =
          resolve(base, required_string(m, "reference_features", where));
      p.query_features = resolve(base, required_string(m, "query_features", where));
      p.metric = metric();
      spec.params = p;
      break;
    }
    case MethodKind::kPrecomputedScores: {
      reject_unknown_keys(m, {"kind", "name", "scores_csv"}, where);
      spec.params =
          PrecomputedScoreParams{resolve(base, required_string(m, "scores_csv", where))};
      break;
    }
  }
  return spec;
}

json method_to_json(const MethodSpec& spec) {
  json m;
  m["kind"] = std::string(kind_name(spec.kind()));
  m["name"] = spec.name;
  std::visit(
      [&m](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, HogMethodParams>) {
          m["cell_px"] = p.hog.cell_px;
          m["resize_px"] = p.hog.resize_px;
          m["epsilon"] = p.hog.epsilon;
          m["metric"] = std::string(metric_name(p.metric));
        } else if constexpr (std::is_same_v<P, GistMethodParams>) {
          m["metric"] = std::string(metric_name(p.metric));
        } else if constexpr (std::is_same_v<P, LocalFeatureMethodParams>) {
          m["match_threshold"] = p.filter.match_threshold;
          m["max_ratio"] = p.filter.max_ratio;
          m["top_n"] = p.filter.top_n;
          m["max_keypoints"] = p.max_keypoints;
        } else if constexpr (std::is_same_v<P, PrecomputedFeatureParams>) {
          m["reference_features"] = p.reference_features.generic_string();
          m["query_features"] = p.query_features.generic_string();
          m["metric"] = std::string(metric_name(p.metric));
        } else {
          m["scores_csv"] = p.scores_csv.generic_string();
        }
      },
      spec.params);
  return m;
}

void validate_method(const MethodSpec& spec, const std::string& where) {
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, HogMethodParams>) {
          if (p.hog.cell_px <= 0) {
            fail(ErrorCategory::kValidation, where + ": cell_px must be positive");
          }
          if (p.hog.resize_px < 0) {
            fail(ErrorCategory::kValidation, where + ": resize_px must be >= 0");
          }
          if (p.hog.resize_px > 0 &&
              (p.hog.resize_px % p.hog.cell_px != 0 ||
               p.hog.resize_px / p.hog.cell_px < kHogBlockCells)) {
            fail(ErrorCategory::kValidation,
                 where + ": resize_px must be a multiple of cell_px with at "
                         "least 2 cells");
          }
          if (!(p.hog.epsilon > 0.0)) {
            fail(ErrorCategory::kValidation, where + ": epsilon must be positive");
          }
        } else if constexpr (std::is_same_v<P, LocalFeatureMethodParams>) {
          try {
            p.filter.validate();
          } catch (const Error& e) {
            fail(ErrorCategory::kValidation, where + ": " + e.what());
          }
          if (p.max_keypoints < 1) {
            fail(ErrorCategory::kValidation, where + ": max_keypoints must be >= 1");
          }
        }
      },
      spec.params);
}

}  // namespace

std::string_view kind_name(MethodKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

MethodKind parse_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == name) return static_cast<MethodKind>(i);
  }
  fail(ErrorCategory::kValidation, "unknown method kind '" + std::string(name) + "'");
}

std::string count_to_string(const CandidateCount& count) {
  return count ? std::to_string(*count) : "all";
}

CandidateCount parse_count(std::string_view text) {
  if (text == "all") return std::nullopt;
  std::size_t value = 0;
  if (text.empty()) fail(ErrorCategory::kValidation, "empty candidate count");
  for (const char c : text) {
    if (c < '0' || c > '9') {
      fail(ErrorCategory::kValidation,
           "candidate count '" + std::string(text) + "' is not an integer or 'all'");
    }
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  if (value == 0) fail(ErrorCategory::kValidation, "candidate count must be >= 1");
  return value;
}

std::vector<double> PipelineConfig::weights() const {
  std::vector<double> w;
  w.reserve(tiers.size());
  for (const auto& t : tiers) w.push_back(t.weight);
  return w;
}

std::vector<double> default_tier_weights(std::size_t tier_count) {
  std::vector<double> w(tier_count);
  for (std::size_t t = 0; t < tier_count; ++t) {
    const std::size_t steps_from_final = tier_count - 1 - t;
    w[t] = std::max(0.0, 1.0 - 0.25 * static_cast<double>(steps_from_final));
  }
  return w;
}

void validate_config(const PipelineConfig& config) {
  if (config.tiers.empty()) {
    fail(ErrorCategory::kValidation, "pipeline needs at least one tier");
  }
  for (std::size_t t = 0; t < config.tiers.size(); ++t) {
    const TierSpec& tier = config.tiers[t];
    const std::string where = "tier " + std::to_string(t + 1);
    if (tier.methods.empty()) {
      fail(ErrorCategory::kValidation, where + " has no methods");
    }
    if (tier.k_out && *tier.k_out < 1) {
      fail(ErrorCategory::kValidation, where + ": k_out must be >= 1");
    }
    if (!std::isfinite(tier.weight) || tier.weight < 0.0) {
      fail(ErrorCategory::kValidation, where + ": weight must be finite and >= 0");
    }
    for (std::size_t m = 0; m < tier.methods.size(); ++m) {
      validate_method(tier.methods[m], where + " method " + std::to_string(m + 1));
    }
    if (t > 0) {
      const auto& prev = config.tiers[t - 1].k_out;
      if (prev && tier.k_out && !(*tier.k_out < *prev)) {
        fail(ErrorCategory::kValidation,
             where + ": k_out " + std::to_string(*tier.k_out) +
                 " must be smaller than the previous tier's " +
                 std::to_string(*prev));
      }
    }
  }
}

PipelineConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCategory::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) parse_fail("root", "must be an object");
  reject_unknown_keys(root, {"combined", "tiers"}, "root");

  PipelineConfig config;
  config.combined_enabled = get_or<bool>(root, "combined", true, "root");
  const auto tiers_it = root.find("tiers");
  if (tiers_it == root.end() || !tiers_it->is_array()) {
    parse_fail("root", "missing array 'tiers'");
  }
  const std::size_t tier_count = tiers_it->size();
  const auto defaults = default_tier_weights(tier_count);
  for (std::size_t t = 0; t < tier_count; ++t) {
    const json& jt = (*tiers_it)[t];
    const std::string where = "tier " + std::to_string(t + 1);
    if (!jt.is_object()) parse_fail(where, "must be an object");
    reject_unknown_keys(jt, {"methods", "k_out", "weight"}, where);
    TierSpec tier;
    const auto k_it = jt.find("k_out");
    if (k_it == jt.end()) parse_fail(where, "missing 'k_out'");
    if (k_it->is_string()) {
      tier.k_out = parse_count(k_it->get<std::string>());
    } else if (k_it->is_number_integer()) {
      const auto k = k_it->get<long long>();
      if (k < 1) fail(ErrorCategory::kValidation, where + ": k_out must be >= 1");
      tier.k_out = static_cast<std::size_t>(k);
    } else {
      parse_fail(where, "'k_out' must be a positive integer or \"all\"");
    }
    tier.weight = get_or<double>(jt, "weight", defaults[t], where);
    const auto methods_it = jt.find("methods");
    if (methods_it == jt.end() || !methods_it->is_array()) {
      parse_fail(where, "missing array 'methods'");
    }
    for (std::size_t m = 0; m < methods_it->size(); ++m) {
      tier.methods.push_back(parse_method((*methods_it)[m], base_dir,
                                          where + " method " + std::to_string(m + 1)));
    }
    config.tiers.push_back(std::move(tier));
  }
  validate_config(config);
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::kIo, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str(), path.parent_path());
  } catch (const Error& e) {
    fail(e.category(), path.string() + ": " + e.what());
  }
}

std::string config_to_json(const PipelineConfig& config) {
  json root;
  root["combined"] = config.combined_enabled;
  root["tiers"] = json::array();
  for (const auto& tier : config.tiers) {
    json jt;
    if (tier.k_out) {
      jt["k_out"] = *tier.k_out;
    } else {
      jt["k_out"] = "all";
    }
    jt["weight"] = tier.weight;
    jt["methods"] = json::array();
    for (const auto& m : tier.methods) jt["methods"].push_back(method_to_json(m));
    root["tiers"].push_back(std::move(jt));
  }
  return root.dump(2) + "\n";
}

void save_config(const std::filesystem::path& path, const PipelineConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCategory::kIo, "cannot write config " + path.string());
  out << config_to_json(config);
}

PipelineConfig with_schedule(const PipelineConfig& config,
                             const std::vector<CandidateCount>& schedule) {
  if (schedule.size() != config.tiers.size()) {
    fail(ErrorCategory::kValidation,
         "schedule has " + std::to_string(schedule.size()) + " entries for " +
             std::to_string(config.tiers.size()) + " tiers");
  }
  PipelineConfig out = config;
  for (std::size_t t = 0; t < schedule.size(); ++t) out.tiers[t].k_out = schedule[t];
  validate_config(out);
  return out;
}

std::vector<CandidateCount> parse_schedule(std::string_view text) {
  std::vector<CandidateCount> schedule;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    std::string_view item = text.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    schedule.push_back(parse_count(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return schedule;
}

}  // namespace hmpf
