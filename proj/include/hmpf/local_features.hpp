#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hmpf/image.hpp"

namespace hmpf {

inline constexpr int kDescriptorBits = 256;
// Largest possible Hamming distance between two descriptors.
inline constexpr double kMaxDescriptorDistance = kDescriptorBits;

using BinaryDescriptor = std::array<std::uint64_t, kDescriptorBits / 64>;

int hamming_distance(const BinaryDescriptor& a, const BinaryDescriptor& b);

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double response = 0.0;
  BinaryDescriptor descriptor{};
};

struct MatchFilterParams {
  // Percent of kMaxDescriptorDistance above which a match is rejected.
  double match_threshold = 20.0;
  // Lowe ratio: reject when best / second-best exceeds this.
  double max_ratio = 0.7;
  // Number of strongest surviving matches summed into the distance.
  int top_n = 20;

  // Throws kValidation when a field is out of range.
  void validate() const;
};

struct DetectorParams {
  int max_keypoints = 500;
  // Harris responses below this fraction of the image maximum are dropped.
  double relative_threshold = 0.01;
  double harris_k = 0.04;
};

struct DescriptorMatch {
  std::size_t query_index = 0;
  std::size_t ref_index = 0;
  int distance = 0;
};

// Harris corners (3x3 non-maximum suppression) described by a 256-bit
// BRIEF-style intensity comparison pattern over a 31x31 smoothed patch.
// Flat images yield no keypoints.
std::vector<Keypoint> detect_and_describe(const GrayImage& image,
                                          const DetectorParams& params = {});

// Nearest and second-nearest neighbour search from each query descriptor into
// `ref`. A match survives when its distance is within the threshold and its
// ratio best/second is <= max_ratio. With a single reference descriptor the
// ratio test is skipped; two zero distances count as ratio 1. Survivors come
// back sorted by ascending distance, ties by query index.
std::vector<DescriptorMatch> match_descriptors(
    std::span<const BinaryDescriptor> query, std::span<const BinaryDescriptor> ref,
    const MatchFilterParams& params);

// Sum of the top_n smallest surviving match distances; each missing match
// (fewer than top_n survivors) adds kMaxDescriptorDistance.
double matched_distance(std::span<const BinaryDescriptor> query,
                        std::span<const BinaryDescriptor> ref,
                        const MatchFilterParams& params);

std::vector<BinaryDescriptor> descriptors_of(std::span<const Keypoint> keypoints);

double local_feature_distance(const GrayImage& query, const GrayImage& ref,
                              const MatchFilterParams& params = {},
                              const DetectorParams& detector = {});

}  // namespace hmpf
