#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hmpf/types.hpp"

namespace hmpf {

// HMPF1 layout, all integers little-endian:
//   bytes 0..3   magic "HMPF"
//   u32          version (= 1)
//   u32          count
//   u32          dim
//   count * dim  IEEE-754 binary32, row-major
inline constexpr std::uint32_t kFeatureFileVersion = 1;
inline constexpr std::size_t kFeatureFileHeaderBytes = 16;

// Decodes an in-memory HMPF1 image. Throws kParse on bad magic/version,
// truncation, trailing bytes, or non-finite values.
std::vector<FeatureVector> decode_feature_file(std::span<const std::uint8_t> bytes);

// Narrows every value to binary32. Throws kValidation if vectors disagree on
// dim or a value does not fit in a finite float.
std::vector<std::uint8_t> encode_feature_file(std::span<const FeatureVector> vectors);

std::vector<FeatureVector> load_feature_file(const std::filesystem::path& path);
void save_feature_file(const std::filesystem::path& path,
                       std::span<const FeatureVector> vectors);

}  // namespace hmpf
