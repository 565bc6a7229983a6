#pragma once

#include "hmpf/image.hpp"
#include "hmpf/types.hpp"

namespace hmpf {

inline constexpr int kGistSize = 256;
inline constexpr int kGistScales = 4;
inline constexpr int kGistOrientations = 8;
inline constexpr int kGistGrid = 4;
inline constexpr std::size_t kGistDim =
    kGistScales * kGistOrientations * kGistGrid * kGistGrid;

// Gist descriptor (512 values).
//
// The image is resampled to 256x256 and filtered in the frequency domain by a
// bank of 4 scales x 8 orientations of log-polar Gabor transfer functions
//   G(f) = exp(-3.5 (|f| / f_s - 1)^2 - 2 pi (angle(f) + j pi / 8)^2)
// with f_s = 0.3 / 1.85^s cycles per pixel. Every filter is zeroed at DC and
// on the Nyquist row and column, so the bank is zero-mean and closed under
// 90-degree rotation. Output is the mean response magnitude over a 4x4 grid of
// 64x64 blocks, ordered [scale][orientation][grid row][grid column].
//
// Throws kValidation when either side is below 16 pixels.
FeatureVector compute_gist(const GrayImage& image);

// Index of (scale, orientation, grid row, grid column) in the output.
constexpr std::size_t gist_index(int scale, int orientation, int row, int col) {
  return ((static_cast<std::size_t>(scale) * kGistOrientations + orientation) *
              kGistGrid +
          row) *
             kGistGrid +
         col;
}

}  // namespace hmpf
