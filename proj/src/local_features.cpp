#include "hmpf/local_features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "hmpf/error.hpp"

namespace hmpf {
namespace {

constexpr int kPatchRadius = 15;
constexpr int kBorder = kPatchRadius + 1;
constexpr double kMinResponse = 1e-10;

struct PointPair {
  int x1, y1, x2, y2;
};

// splitmix64; fixed so the sampling pattern is identical on every platform.
std::uint64_t next_random(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

const std::array<PointPair, kDescriptorBits>& sampling_pattern() {
  static const auto pattern = [] {
    std::array<PointPair, kDescriptorBits> p{};
    std::uint64_t state = 0x48'4D'50'46'42'52'49'45ull;
    const double sigma = (2.0 * kPatchRadius + 1.0) / 5.0;
    auto gaussian_offset = [&] {
      const double u1 =
          (static_cast<double>(next_random(state) >> 11) + 1.0) * 0x1.0p-53;
      const double u2 = static_cast<double>(next_random(state) >> 11) * 0x1.0p-53;
      const double g =
          std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      return static_cast<int>(std::clamp(std::lround(g * sigma),
                                         static_cast<long>(-kPatchRadius),
                                         static_cast<long>(kPatchRadius)));
    };
    for (auto& pair : p) {
      do {
        pair = {gaussian_offset(), gaussian_offset(), gaussian_offset(),
                gaussian_offset()};
      } while (pair.x1 == pair.x2 && pair.y1 == pair.y2);
    }
    return p;
  }();
  return pattern;
}

// Separable [1 4 6 4 1] / 16 blur with replicated borders.
std::vector<double> blur(std::span<const double> src, int w, int h) {
  static constexpr double kTaps[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16,
                                      1.0 / 16};
  std::vector<double> tmp(src.size());
  std::vector<double> out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) {
        const int xx = std::clamp(x + k, 0, w - 1);
        acc += kTaps[k + 2] * src[static_cast<std::size_t>(y) * w + xx];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) {
        const int yy = std::clamp(y + k, 0, h - 1);
        acc += kTaps[k + 2] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

int hamming_distance(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::popcount(a[i] ^ b[i]);
  return d;
}

void MatchFilterParams::validate() const {
  if (!(match_threshold > 0.0 && match_threshold <= 100.0)) {
    fail(ErrorCategory::kValidation, "match_threshold must be in (0, 100]");
  }
  if (!(max_ratio > 0.0 && max_ratio <= 1.0)) {
    fail(ErrorCategory::kValidation, "max_ratio must be in (0, 1]");
  }
  if (top_n < 1) {
    fail(ErrorCategory::kValidation, "top_n must be a positive integer");
  }
}

std::vector<Keypoint> detect_and_describe(const GrayImage& image,
                                          const DetectorParams& params) {
  const int w = image.width();
  const int h = image.height();
  if (w <= 2 * kBorder || h <= 2 * kBorder) return {};

  const std::vector<double> smooth = blur(image.pixels(), w, h);
  const auto idx = [w](int x, int y) {
    return static_cast<std::size_t>(y) * w + x;
  };

  std::vector<double> ixx(smooth.size()), iyy(smooth.size()), ixy(smooth.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (smooth[idx(std::min(x + 1, w - 1), y)] -
                               smooth[idx(std::max(x - 1, 0), y)]);
      const double gy = 0.5 * (smooth[idx(x, std::min(y + 1, h - 1))] -
                               smooth[idx(x, std::max(y - 1, 0))]);
      ixx[idx(x, y)] = gx * gx;
      iyy[idx(x, y)] = gy * gy;
      ixy[idx(x, y)] = gx * gy;
    }
  }
  const auto sxx = blur(ixx, w, h);
  const auto syy = blur(iyy, w, h);
  const auto sxy = blur(ixy, w, h);

  std::vector<double> response(smooth.size());
  double max_response = 0.0;
  for (std::size_t i = 0; i < response.size(); ++i) {
    const double det = sxx[i] * syy[i] - sxy[i] * sxy[i];
    const double trace = sxx[i] + syy[i];
    response[i] = det - params.harris_k * trace * trace;
    max_response = std::max(max_response, response[i]);
  }
  if (max_response <= kMinResponse) return {};
  const double threshold =
      std::max(params.relative_threshold * max_response, kMinResponse);

  std::vector<Keypoint> keypoints;
  for (int y = kBorder; y < h - kBorder; ++y) {
    for (int x = kBorder; x < w - kBorder; ++x) {
      const double r = response[idx(x, y)];
      if (r < threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx != 0 || dy != 0) && response[idx(x + dx, y + dy)] >= r) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) keypoints.push_back({static_cast<double>(x),
                                       static_cast<double>(y), r, {}});
    }
  }
  std::stable_sort(keypoints.begin(), keypoints.end(),
                   [](const Keypoint& a, const Keypoint& b) {
                     return a.response > b.response;
                   });
  if (keypoints.size() > static_cast<std::size_t>(params.max_keypoints)) {
    keypoints.resize(static_cast<std::size_t>(params.max_keypoints));
  }

  const std::vector<double> patch_image = blur(smooth, w, h);
  const auto& pattern = sampling_pattern();
  for (auto& kp : keypoints) {
    const int cx = static_cast<int>(kp.x);
    const int cy = static_cast<int>(kp.y);
    for (int bit = 0; bit < kDescriptorBits; ++bit) {
      const PointPair& p = pattern[bit];
      if (patch_image[idx(cx + p.x1, cy + p.y1)] <
          patch_image[idx(cx + p.x2, cy + p.y2)]) {
        kp.descriptor[bit / 64] |= std::uint64_t{1} << (bit % 64);
      }
    }
  }
  return keypoints;
}

std::vector<DescriptorMatch> match_descriptors(
    std::span<const BinaryDescriptor> query, std::span<const BinaryDescriptor> ref,
    const MatchFilterParams& params) {
  params.validate();
  std::vector<DescriptorMatch> matches;
  if (ref.empty()) return matches;
  const double max_allowed = params.match_threshold / 100.0 * kMaxDescriptorDistance;
  for (std::size_t q = 0; q < query.size(); ++q) {
    int best = std::numeric_limits<int>::max();
    int second = std::numeric_limits<int>::max();
    std::size_t best_index = 0;
    for (std::size_t r = 0; r < ref.size(); ++r) {
      const int d = hamming_distance(query[q], ref[r]);
      if (d < best) {
        second = best;
        best = d;
        best_index = r;
      } else if (d < second) {
        second = d;
      }
    }
    if (best > max_allowed) continue;
    if (ref.size() > 1) {
      const double ratio =
          second == 0 ? 1.0 : static_cast<double>(best) / second;
      if (ratio > params.max_ratio) continue;
    }
    matches.push_back({q, best_index, best});
  }
  std::stable_sort(matches.begin(), matches.end(),
                   [](const DescriptorMatch& a, const DescriptorMatch& b) {
                     return a.distance < b.distance;
                   });
  return matches;
}

double matched_distance(std::span<const BinaryDescriptor> query,
                        std::span<const BinaryDescriptor> ref,
                        const MatchFilterParams& params) {
  const auto matches = match_descriptors(query, ref, params);
  const std::size_t top_n = static_cast<std::size_t>(params.top_n);
  const std::size_t used = std::min(matches.size(), top_n);
  double total = 0.0;
  for (std::size_t i = 0; i < used; ++i) total += matches[i].distance;
  total += static_cast<double>(top_n - used) * kMaxDescriptorDistance;
  return total;
}

std::vector<BinaryDescriptor> descriptors_of(std::span<const Keypoint> keypoints) {
  std::vector<BinaryDescriptor> out;
  out.reserve(keypoints.size());
  for (const auto& kp : keypoints) out.push_back(kp.descriptor);
  return out;
}

double local_feature_distance(const GrayImage& query, const GrayImage& ref,
                              const MatchFilterParams& params,
                              const DetectorParams& detector) {
  const auto q = descriptors_of(detect_and_describe(query, detector));
  const auto r = descriptors_of(detect_and_describe(ref, detector));
  return matched_distance(q, r, params);
}

}  // namespace hmpf
