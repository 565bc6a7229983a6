#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "hmpf/types.hpp"

namespace hmpf {

struct PlanarCoord {
  double x_m = 0.0;
  double y_m = 0.0;
  friend bool operator==(const PlanarCoord&, const PlanarCoord&) = default;
};

enum class GroundTruthMode { kFrameOffset, kMetric };

struct GroundTruthSpec {
  GroundTruthMode mode = GroundTruthMode::kFrameOffset;
  std::size_t frame_tolerance = 0;
  double metric_tolerance_m = 0.0;
  // Metric mode only; one entry per image of each list.
  std::vector<PlanarCoord> reference_coords;
  std::vector<PlanarCoord> query_coords;
};

// Image lists are ordered; an image's id is its position. Feature-only
// datasets (every method reads precomputed files) carry counts and no paths.
struct Dataset {
  std::vector<std::filesystem::path> reference_images;
  std::vector<std::filesystem::path> query_images;
  std::size_t reference_count = 0;
  std::size_t query_count = 0;
  GroundTruthSpec ground_truth;

  bool has_images() const { return !reference_images.empty(); }
};

// JSON manifest:
//   reference_dir / reference_list   base directory and names (array, or a
//   query_dir / query_list           text file with one name per line);
//                                    without a list the directory is scanned
//                                    for .png/.jpg/.jpeg/.pgm in name order
//   reference_count / query_count    instead of lists, for feature-only sets
//   ground_truth.mode                "frame-offset" | "metric"
//   ground_truth.frame_tolerance     frames (frame-offset)
//   ground_truth.index_aligned       required true when list lengths differ
//   ground_truth.coords_csv          list,index,x_m,y_m (metric)
//   ground_truth.metric_tolerance_m  meters (metric)
// Relative paths resolve against the manifest's directory.
//
// Throws kIo for a missing image or coords file, kParse for malformed
// content, kValidation for inconsistent ground truth.
Dataset load_dataset(const std::filesystem::path& manifest_path);
Dataset parse_dataset(std::string_view manifest_json,
                      const std::filesystem::path& base_dir);

// One image list of a manifest ("reference" or "query") without the
// ground-truth checks. Empty when the manifest lists no images.
std::vector<std::filesystem::path> load_image_list(const std::filesystem::path& manifest_path,
                                                   std::string_view list);

// Writes a feature-only frame-offset manifest.
void save_count_manifest(const std::filesystem::path& path,
                         std::size_t reference_count, std::size_t query_count,
                         std::size_t frame_tolerance);

// Dense query x reference matrix of raw distances.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  // Throws kValidation on shape mismatch or a negative / non-finite entry.
  ScoreMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t row, std::size_t col) const { return values_[row * cols_ + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols_, cols_);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// CSV, one row per query and one column per reference, no header. Blank lines
// and lines starting with '#' are skipped.
ScoreMatrix load_score_matrix(const std::filesystem::path& path);
void save_score_matrix(const std::filesystem::path& path, const ScoreMatrix& matrix);

}  // namespace hmpf
