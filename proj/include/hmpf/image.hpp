#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace hmpf {

// Single-channel image, row-major, intensities in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  // Throws kValidation on non-positive size, pixel-count mismatch, or values
  // outside [0, 1].
  GrayImage(int width, int height, std::vector<double> pixels);
  // Constant image.
  GrayImage(int width, int height, double fill);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }
  std::span<const double> pixels() const { return pixels_; }

  double at(int x, int y) const {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }
  // Border-replicating access.
  double clamped(int x, int y) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

// Bilinear resampling with pixel-center alignment. Returns the input
// unchanged when the size already matches.
GrayImage resize_bilinear(const GrayImage& image, int width, int height);

// Rotates by 90 degrees counter-clockwise: out(x, y) = in(W - 1 - y, x).
GrayImage rotate90(const GrayImage& image);

// Decodes an 8-bit PNG/JPEG (or anything the codec accepts) and converts to
// gray with luma weights 0.299 / 0.587 / 0.114. Throws kIo when unreadable.
GrayImage load_gray_image(const std::filesystem::path& path);

// Writes an 8-bit gray PNG; used by tests and demo tooling.
void save_gray_image(const std::filesystem::path& path, const GrayImage& image);

}  // namespace hmpf
