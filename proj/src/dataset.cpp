#include "hmpf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hmpf {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::kIo, std::string("cannot open ") + what + " " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".pgm";
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return (p.is_relative() && !base.empty() ? base / p : p).lexically_normal();
}

// Resolves one image list. Returns empty when the manifest gives neither a
// list nor a directory.
std::vector<fs::path> image_list(const json& root, const std::string& prefix,
                                 const fs::path& base, bool allow_empty = false) {
  const auto dir_it = root.find(prefix + "_dir");
  const auto list_it = root.find(prefix + "_list");
  fs::path dir = base;
  if (dir_it != root.end()) {
    if (!dir_it->is_string()) {
      fail(ErrorCategory::kParse, "manifest: " + prefix + "_dir must be a string");
    }
    dir = resolve(base, dir_it->get<std::string>());
  }

  std::vector<fs::path> images;
  if (list_it != root.end()) {
    std::vector<std::string> names;
    if (list_it->is_array()) {
      for (const auto& n : *list_it) {
        if (!n.is_string()) {
          fail(ErrorCategory::kParse, "manifest: " + prefix + "_list entries must be strings");
        }
        names.push_back(n.get<std::string>());
      }
    } else if (list_it->is_string()) {
      std::istringstream lines(read_text(resolve(base, list_it->get<std::string>()),
                                         "image list"));
      std::string line;
      while (std::getline(lines, line)) {
        const auto t = trim(line);
        if (!t.empty() && t.front() != '#') names.emplace_back(t);
      }
    } else {
      fail(ErrorCategory::kParse,
           "manifest: " + prefix + "_list must be an array or a file path");
    }
    for (const auto& n : names) images.push_back(resolve(dir, n));
  } else if (dir_it != root.end()) {
    if (!fs::is_directory(dir)) {
      fail(ErrorCategory::kIo, "image directory " + dir.string() + " does not exist");
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && is_image_file(entry.path())) {
        images.push_back(entry.path().lexically_normal());
      }
    }
    std::sort(images.begin(), images.end());
  } else {
    return {};
  }

  for (const auto& img : images) {
    std::error_code ec;
    if (!fs::is_regular_file(img, ec)) {
      fail(ErrorCategory::kIo, "image file not found: " + img.string());
    }
  }
  if (images.empty() && !allow_empty) {
    fail(ErrorCategory::kValidation, "manifest: " + prefix + " list is empty");
  }
  return images;
}

std::size_t count_field(const json& root, const std::string& key) {
  const auto it = root.find(key);
  if (it == root.end()) return 0;
  if (!it->is_number_integer() || it->get<long long>() < 1) {
    fail(ErrorCategory::kParse, "manifest: " + key + " must be a positive integer");
  }
  return it->get<std::size_t>();
}

void load_coords(const fs::path& path, Dataset& ds) {
  auto& gt = ds.ground_truth;
  std::vector<std::optional<PlanarCoord>> refs(ds.reference_count);
  std::vector<std::optional<PlanarCoord>> queries(ds.query_count);
  std::istringstream lines(read_text(path, "coords csv"));
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = split(t, ',');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!header_seen && cols.size() == 4 && cols[0] == "list") {
      header_seen = true;
      continue;
    }
    header_seen = true;
    if (cols.size() != 4) {
      fail(ErrorCategory::kParse, where + ": expected list,index,x_m,y_m");
    }
    const auto index = parse_number<std::size_t>(cols[1]);
    const auto x = parse_number<double>(cols[2]);
    const auto y = parse_number<double>(cols[3]);
    if (!index || !x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
      fail(ErrorCategory::kParse, where + ": malformed coordinate row");
    }
    auto* target = cols[0] == "reference" ? &refs
                   : cols[0] == "query"   ? &queries
                                          : nullptr;
    if (!target) {
      fail(ErrorCategory::kParse, where + ": list must be 'reference' or 'query'");
    }
    if (*index >= target->size()) {
      fail(ErrorCategory::kValidation, where + ": index " + std::to_string(*index) +
                                           " outside the " + std::string(cols[0]) +
                                           " list");
    }
    (*target)[*index] = PlanarCoord{*x, *y};
  }
  const auto collect = [&](const auto& in, std::vector<PlanarCoord>& out,
                           const char* list) {
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (!in[i]) {
        fail(ErrorCategory::kValidation, std::string("metric ground truth: ") + list +
                                             " image " + std::to_string(i) +
                                             " has no coordinates");
      }
      out.push_back(*in[i]);
    }
  };
  collect(refs, gt.reference_coords, "reference");
  collect(queries, gt.query_coords, "query");
}

}  // namespace

Dataset parse_dataset(std::string_view manifest_json, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(manifest_json);
  } catch (const json::parse_error& e) {
    fail(ErrorCategory::kParse, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail(ErrorCategory::kParse, "manifest root must be an object");

  Dataset ds;
  ds.reference_images = image_list(root, "reference", base_dir);
  ds.query_images = image_list(root, "query", base_dir);
  if (ds.reference_images.empty() != ds.query_images.empty()) {
    fail(ErrorCategory::kValidation,
         "manifest must give image lists for both references and queries, or neither");
  }
  if (ds.has_images()) {
    ds.reference_count = ds.reference_images.size();
    ds.query_count = ds.query_images.size();
    for (const char* key : {"reference_count", "query_count"}) {
      const std::size_t declared = count_field(root, key);
      const std::size_t actual = std::string(key) == "reference_count"
                                     ? ds.reference_count
                                     : ds.query_count;
      if (declared != 0 && declared != actual) {
        fail(ErrorCategory::kMismatch, std::string("manifest ") + key + " " +
                                           std::to_string(declared) + " but list has " +
                                           std::to_string(actual) + " images");
      }
    }
  } else {
    ds.reference_count = count_field(root, "reference_count");
    ds.query_count = count_field(root, "query_count");
    if (ds.reference_count == 0 || ds.query_count == 0) {
      fail(ErrorCategory::kValidation,
           "manifest needs reference/query image lists or positive counts");
    }
  }

  const auto gt_it = root.find("ground_truth");
  if (gt_it == root.end() || !gt_it->is_object()) {
    fail(ErrorCategory::kParse, "manifest is missing the ground_truth block");
  }
  const json& gt = *gt_it;
  const auto mode_it = gt.find("mode");
  if (mode_it == gt.end() || !mode_it->is_string()) {
    fail(ErrorCategory::kParse, "ground_truth.mode must be a string");
  }
  const std::string mode = mode_it->get<std::string>();
  if (mode == "frame-offset") {
    ds.ground_truth.mode = GroundTruthMode::kFrameOffset;
    const auto tol = gt.find("frame_tolerance");
    if (tol == gt.end() || !tol->is_number_integer() || tol->get<long long>() < 0) {
      fail(ErrorCategory::kParse,
           "ground_truth.frame_tolerance must be a non-negative integer");
    }
    ds.ground_truth.frame_tolerance = tol->get<std::size_t>();
    const auto aligned = gt.find("index_aligned");
    const bool asserted = aligned != gt.end() && aligned->is_boolean() && aligned->get<bool>();
    if (ds.reference_count != ds.query_count && !asserted) {
      fail(ErrorCategory::kValidation,
           "frame-offset ground truth with " + std::to_string(ds.reference_count) +
               " references and " + std::to_string(ds.query_count) +
               " queries requires ground_truth.index_aligned = true");
    }
  } else if (mode == "metric") {
    ds.ground_truth.mode = GroundTruthMode::kMetric;
    const auto tol = gt.find("metric_tolerance_m");
    if (tol == gt.end() || !tol->is_number()) {
      fail(ErrorCategory::kParse, "ground_truth.metric_tolerance_m must be a number");
    }
    ds.ground_truth.metric_tolerance_m = tol->get<double>();
    if (!(ds.ground_truth.metric_tolerance_m > 0.0) ||
        !std::isfinite(ds.ground_truth.metric_tolerance_m)) {
      fail(ErrorCategory::kValidation, "metric tolerance must be positive");
    }
    const auto csv = gt.find("coords_csv");
    if (csv == gt.end() || !csv->is_string()) {
      fail(ErrorCategory::kValidation, "metric ground truth requires coords_csv");
    }
    load_coords(resolve(base_dir, csv->get<std::string>()), ds);
  } else {
    fail(ErrorCategory::kValidation, "unknown ground_truth.mode '" + mode + "'");
  }
  return ds;
}

std::vector<fs::path> load_image_list(const fs::path& manifest_path, std::string_view list) {
  if (list != "reference" && list != "query") {
    fail(ErrorCategory::kUsage, "image list must be 'reference' or 'query'");
  }
  const std::string text = read_text(manifest_path, "manifest");
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCategory::kParse,
         manifest_path.string() + ": manifest is not valid JSON: " + e.what());
  }
  if (!root.is_object()) {
    fail(ErrorCategory::kParse, manifest_path.string() + ": manifest root must be an object");
  }
  return image_list(root, std::string(list), manifest_path.parent_path(), true);
}

Dataset load_dataset(const fs::path& manifest_path) {
  const std::string text = read_text(manifest_path, "manifest");
  try {
    return parse_dataset(text, manifest_path.parent_path());
  } catch (const Error& e) {
    fail(e.category(), manifest_path.string() + ": " + e.what());
  }
}

void save_count_manifest(const fs::path& path, std::size_t reference_count,
                         std::size_t query_count, std::size_t frame_tolerance) {
  json root;
  root["reference_count"] = reference_count;
  root["query_count"] = query_count;
  root["ground_truth"] = {{"mode", "frame-offset"},
                         {"frame_tolerance", frame_tolerance},
                         {"index_aligned", true}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCategory::kIo, "cannot write manifest " + path.string());
  out << root.dump(2) << "\n";
}

ScoreMatrix::ScoreMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    fail(ErrorCategory::kValidation, "score matrix shape does not match its data");
  }
  for (const double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      fail(ErrorCategory::kValidation,
           "score matrix entries must be finite non-negative distances");
    }
  }
}

ScoreMatrix load_score_matrix(const fs::path& path) {
  std::istringstream lines(read_text(path, "score matrix"));
  std::string line;
  std::size_t line_no = 0;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::vector<double> values;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t, ',');
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols) {
      fail(ErrorCategory::kParse, path.string() + ":" + std::to_string(line_no) +
                                      ": expected " + std::to_string(cols) +
                                      " columns, got " + std::to_string(fields.size()));
    }
    for (const auto f : fields) {
      const auto v = parse_number<double>(f);
      if (!v) {
        fail(ErrorCategory::kParse, path.string() + ":" + std::to_string(line_no) +
                                        ": '" + std::string(f) + "' is not a number");
      }
      values.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) fail(ErrorCategory::kParse, path.string() + ": empty score matrix");
  try {
    return ScoreMatrix(rows, cols, std::move(values));
  } catch (const Error& e) {
    fail(e.category(), path.string() + ": " + e.what());
  }
}

void save_score_matrix(const fs::path& path, const ScoreMatrix& matrix) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCategory::kIo, "cannot write score matrix " + path.string());
  char buf[32];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (c) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof(buf), matrix.at(r, c));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace hmpf
