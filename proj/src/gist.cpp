#include "hmpf/gist.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace hmpf {
namespace {

constexpr int kN = kGistSize;
constexpr std::size_t kPixels = static_cast<std::size_t>(kN) * kN;
constexpr double kBandwidth = 0.35;
constexpr double kCenterFrequency = 0.3;
constexpr double kScaleStep = 1.85;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

ComplexBuffer make_buffer() {
  return ComplexBuffer(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * kPixels)));
}

// Plans are created once; fftw_execute_dft on fresh fftw_malloc'd buffers is
// thread-safe, planning is not.
class GistKernel {
 public:
  static const GistKernel& instance() {
    static const GistKernel kernel;
    return kernel;
  }

  void forward(fftw_complex* in, fftw_complex* out) const {
    fftw_execute_dft(forward_, in, out);
  }
  void inverse(fftw_complex* in, fftw_complex* out) const {
    fftw_execute_dft(inverse_, in, out);
  }
  const double* filter(int scale, int orientation) const {
    return &filters_[(static_cast<std::size_t>(scale) * kGistOrientations +
                      orientation) *
                     kPixels];
  }

  GistKernel(const GistKernel&) = delete;
  GistKernel& operator=(const GistKernel&) = delete;

 private:
  GistKernel() {
    {
      static std::mutex planner_mutex;
      std::lock_guard<std::mutex> lock(planner_mutex);
      ComplexBuffer a = make_buffer();
      ComplexBuffer b = make_buffer();
      forward_ = fftw_plan_dft_2d(kN, kN, a.get(), b.get(), FFTW_FORWARD,
                                  FFTW_ESTIMATE);
      inverse_ = fftw_plan_dft_2d(kN, kN, a.get(), b.get(), FFTW_BACKWARD,
                                  FFTW_ESTIMATE);
    }
    build_filters();
  }

  void build_filters() {
    filters_.assign(kPixels * kGistScales * kGistOrientations, 0.0);
    for (int s = 0; s < kGistScales; ++s) {
      const double center = kCenterFrequency / std::pow(kScaleStep, s);
      for (int o = 0; o < kGistOrientations; ++o) {
        const double theta = std::numbers::pi * o / kGistOrientations;
        double* g = &filters_[(static_cast<std::size_t>(s) * kGistOrientations +
                               o) *
                              kPixels];
        for (int v = 0; v < kN; ++v) {
          const int fy = v < kN / 2 ? v : v - kN;
          for (int u = 0; u < kN; ++u) {
            const int fx = u < kN / 2 ? u : u - kN;
            if ((fx == 0 && fy == 0) || fx == -kN / 2 || fy == -kN / 2) {
              continue;
            }
            const double radius = std::hypot(fx, fy) / kN;
            double t = std::atan2(static_cast<double>(fy), fx) + theta;
            if (t < -std::numbers::pi) t += 2.0 * std::numbers::pi;
            if (t > std::numbers::pi) t -= 2.0 * std::numbers::pi;
            const double r = radius / center - 1.0;
            g[static_cast<std::size_t>(v) * kN + u] =
                std::exp(-10.0 * kBandwidth * r * r -
                         2.0 * std::numbers::pi * t * t);
          }
        }
      }
    }
  }

  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
  std::vector<double> filters_;
};

}  // namespace

FeatureVector compute_gist(const GrayImage& input) {
  if (input.width() < 16 || input.height() < 16) {
    fail(ErrorCategory::kValidation, "Gist needs an image of at least 16x16");
  }
  const GrayImage image = resize_bilinear(input, kN, kN);
  const GistKernel& kernel = GistKernel::instance();

  ComplexBuffer spatial = make_buffer();
  ComplexBuffer spectrum = make_buffer();
  ComplexBuffer filtered = make_buffer();
  ComplexBuffer response = make_buffer();
  const auto pixels = image.pixels();
  for (std::size_t i = 0; i < kPixels; ++i) {
    spatial[i][0] = pixels[i];
    spatial[i][1] = 0.0;
  }
  kernel.forward(spatial.get(), spectrum.get());

  constexpr int kBlock = kN / kGistGrid;
  constexpr double kNorm = 1.0 / static_cast<double>(kPixels);
  constexpr double kBlockArea = static_cast<double>(kBlock) * kBlock;
  std::vector<double> out(kGistDim, 0.0);
  std::vector<double> pooled(kGistGrid * kGistGrid);
  for (int s = 0; s < kGistScales; ++s) {
    for (int o = 0; o < kGistOrientations; ++o) {
      const double* g = kernel.filter(s, o);
      for (std::size_t i = 0; i < kPixels; ++i) {
        filtered[i][0] = spectrum[i][0] * g[i];
        filtered[i][1] = spectrum[i][1] * g[i];
      }
      kernel.inverse(filtered.get(), response.get());
      std::fill(pooled.begin(), pooled.end(), 0.0);
      for (int y = 0; y < kN; ++y) {
        for (int x = 0; x < kN; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * kN + x;
          pooled[(y / kBlock) * kGistGrid + x / kBlock] +=
              std::hypot(response[i][0], response[i][1]) * kNorm;
        }
      }
      for (int row = 0; row < kGistGrid; ++row) {
        for (int col = 0; col < kGistGrid; ++col) {
          out[gist_index(s, o, row, col)] =
              pooled[row * kGistGrid + col] / kBlockArea;
        }
      }
    }
  }
  return FeatureVector(std::move(out));
}

}  // namespace hmpf
