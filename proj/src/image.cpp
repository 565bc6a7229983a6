#include "hmpf/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "hmpf/error.hpp"

namespace hmpf {

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) {
    fail(ErrorCategory::kValidation, "image dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorCategory::kValidation, "image pixel count does not match size");
  }
  for (const double p : pixels_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorCategory::kValidation, "image intensity outside [0, 1]");
    }
  }
}

GrayImage::GrayImage(int width, int height, double fill)
    : GrayImage(width, height,
                std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                        std::max(height, 0),
                                    fill)) {}

double GrayImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

GrayImage resize_bilinear(const GrayImage& image, int width, int height) {
  if (image.width() == width && image.height() == height) return image;
  if (width <= 0 || height <= 0 || image.empty()) {
    fail(ErrorCategory::kValidation, "invalid resize target");
  }
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  std::vector<double> out(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(image.height() - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(image.width() - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      const double top = image.at(x0, y0) * (1.0 - wx) + image.at(x1, y0) * wx;
      const double bottom =
          image.at(x0, y1) * (1.0 - wx) + image.at(x1, y1) * wx;
      out[static_cast<std::size_t>(y) * width + x] =
          std::clamp(top * (1.0 - wy) + bottom * wy, 0.0, 1.0);
    }
  }
  return GrayImage(width, height, std::move(out));
}

GrayImage rotate90(const GrayImage& image) {
  const int w = image.width();
  const int h = image.height();
  // Output is h wide and w tall.
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < w; ++y) {
    for (int x = 0; x < h; ++x) {
      out[static_cast<std::size_t>(y) * h + x] = image.at(w - 1 - y, x);
    }
  }
  return GrayImage(h, w, std::move(out));
}

GrayImage load_gray_image(const std::filesystem::path& path) {
  const cv::Mat decoded = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (decoded.empty()) {
    fail(ErrorCategory::kIo, "cannot read image " + path.string());
  }
  cv::Mat img;
  double scale = 1.0 / 255.0;
  if (decoded.depth() == CV_16U) {
    scale = 1.0 / 65535.0;
  } else if (decoded.depth() != CV_8U) {
    fail(ErrorCategory::kIo, "unsupported pixel depth in " + path.string());
  }
  decoded.convertTo(img, CV_64F, scale);

  const int w = img.cols;
  const int h = img.rows;
  const int channels = img.channels();
  std::vector<double> pixels(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const double* row = img.ptr<double>(y);
    for (int x = 0; x < w; ++x) {
      const double* px = row + static_cast<std::ptrdiff_t>(x) * channels;
      double v = 0.0;
      if (channels == 1 || channels == 2) {
        v = px[0];
      } else {
        // OpenCV stores BGR(A).
        v = 0.114 * px[0] + 0.587 * px[1] + 0.299 * px[2];
      }
      pixels[static_cast<std::size_t>(y) * w + x] = std::clamp(v, 0.0, 1.0);
    }
  }
  return GrayImage(w, h, std::move(pixels));
}

void save_gray_image(const std::filesystem::path& path, const GrayImage& image) {
  cv::Mat out(image.height(), image.width(), CV_8UC1);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = out.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width(); ++x) {
      row[x] = static_cast<std::uint8_t>(std::lround(image.at(x, y) * 255.0));
    }
  }
  if (!cv::imwrite(path.string(), out)) {
    fail(ErrorCategory::kIo, "cannot write image " + path.string());
  }
}

}  // namespace hmpf
