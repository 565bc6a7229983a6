#include "hmpf/hog.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hmpf {

std::size_t hog_dim(int width, int height, int cell_px) {
  const int cells_x = width / cell_px;
  const int cells_y = height / cell_px;
  if (cells_x < kHogBlockCells || cells_y < kHogBlockCells) return 0;
  return static_cast<std::size_t>(cells_x - 1) * (cells_y - 1) *
         (kHogBlockCells * kHogBlockCells * kHogBins);
}

FeatureVector compute_hog(const GrayImage& input, const HogParams& params) {
  if (params.cell_px <= 0) {
    fail(ErrorCategory::kValidation, "HOG cell size must be positive");
  }
  if (input.empty()) fail(ErrorCategory::kValidation, "HOG of empty image");
  const GrayImage image =
      params.resize_px > 0
          ? resize_bilinear(input, params.resize_px, params.resize_px)
          : input;
  const int w = image.width();
  const int h = image.height();
  const int cell = params.cell_px;
  if (w % cell != 0 || h % cell != 0) {
    fail(ErrorCategory::kValidation,
         "HOG image " + std::to_string(w) + "x" + std::to_string(h) +
             " is not divisible by cell size " + std::to_string(cell));
  }
  const int cells_x = w / cell;
  const int cells_y = h / cell;
  if (cells_x < kHogBlockCells || cells_y < kHogBlockCells) {
    fail(ErrorCategory::kValidation, "HOG image smaller than 2x2 cells");
  }

  constexpr double kBinWidth = std::numbers::pi / kHogBins;
  std::vector<double> hist(static_cast<std::size_t>(cells_x) * cells_y * kHogBins,
                           0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = image.clamped(x + 1, y) - image.clamped(x - 1, y);
      const double gy = image.clamped(x, y + 1) - image.clamped(x, y - 1);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += std::numbers::pi;
      if (angle >= std::numbers::pi) angle -= std::numbers::pi;
      const double pos = angle / kBinWidth;
      const double lower = std::floor(pos);
      const double frac = pos - lower;
      const int lo = static_cast<int>(lower) % kHogBins;
      const int hi = (lo + 1) % kHogBins;
      double* bins =
          &hist[(static_cast<std::size_t>(y / cell) * cells_x + x / cell) *
                kHogBins];
      bins[lo] += mag * (1.0 - frac);
      bins[hi] += mag * frac;
    }
  }

  const double eps2 = params.epsilon * params.epsilon;
  std::vector<double> out;
  out.reserve(hog_dim(w, h, cell));
  for (int by = 0; by + 1 < cells_y; ++by) {
    for (int bx = 0; bx + 1 < cells_x; ++bx) {
      const std::size_t start = out.size();
      for (int cy = by; cy < by + kHogBlockCells; ++cy) {
        for (int cx = bx; cx < bx + kHogBlockCells; ++cx) {
          const double* bins =
              &hist[(static_cast<std::size_t>(cy) * cells_x + cx) * kHogBins];
          out.insert(out.end(), bins, bins + kHogBins);
        }
      }
      double norm2 = 0.0;
      for (std::size_t i = start; i < out.size(); ++i) norm2 += out[i] * out[i];
      const double inv = 1.0 / std::sqrt(norm2 + eps2);
      for (std::size_t i = start; i < out.size(); ++i) out[i] *= inv;
    }
  }
  return FeatureVector(std::move(out));
}

}  // namespace hmpf
