#pragma once

#include "hmpf/image.hpp"
#include "hmpf/types.hpp"

namespace hmpf {

inline constexpr int kHogBins = 9;
inline constexpr int kHogBlockCells = 2;

struct HogParams {
  int cell_px = 30;
  // Square side the image is resampled to first; 0 keeps the native size.
  int resize_px = 300;
  double epsilon = 1e-3;
};

// Output length for a `width` x `height` input (after resizing).
std::size_t hog_dim(int width, int height, int cell_px);

// Dalal-Triggs HOG.
//
// Centered [-1, 0, 1] gradients with replicated borders; unsigned orientation
// over [0, 180) split into 9 bins centered at 0, 20, ..., 160 degrees, votes
// weighted by magnitude and linearly interpolated between the two nearest
// bins; each pixel votes only into its own cell. Blocks are 2x2 cells with a
// one-cell stride, ordered row-major; inside a block the cells are
// (top-left, top-right, bottom-left, bottom-right). Each 36-vector is divided
// by sqrt(|v|^2 + epsilon^2).
//
// Throws kValidation when the (resized) sides are not multiples of cell_px
// or the grid is smaller than 2x2 cells.
FeatureVector compute_hog(const GrayImage& image, const HogParams& params = {});

}  // namespace hmpf
