#include "hmpf/feature_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace hmpf {
namespace {

constexpr std::uint8_t kMagic[4] = {'H', 'M', 'P', 'F'};

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFFu));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFFu));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFFu));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFFu));
}

}  // namespace

std::vector<FeatureVector> decode_feature_file(
    std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFeatureFileHeaderBytes) {
    fail(ErrorCategory::kParse, "feature file truncated: header needs 16 bytes, got " +
                                    std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    fail(ErrorCategory::kParse, "feature file has bad magic (expected HMPF)");
  }
  const std::uint32_t version = read_u32_le(bytes.data() + 4);
  if (version != kFeatureFileVersion) {
    fail(ErrorCategory::kParse,
         "unsupported feature file version " + std::to_string(version));
  }
  const std::uint64_t count = read_u32_le(bytes.data() + 8);
  const std::uint64_t dim = read_u32_le(bytes.data() + 12);
  if (count > 0 && dim == 0) {
    fail(ErrorCategory::kParse, "feature file declares dim 0");
  }
  const std::uint64_t payload = count * dim * 4;
  const std::uint64_t available = bytes.size() - kFeatureFileHeaderBytes;
  if (available < payload) {
    fail(ErrorCategory::kParse,
         "feature file truncated: expected " + std::to_string(payload) +
             " payload bytes, got " + std::to_string(available));
  }
  if (available > payload) {
    fail(ErrorCategory::kParse, "feature file has " +
                                    std::to_string(available - payload) +
                                    " trailing bytes");
  }

  std::vector<FeatureVector> vectors;
  vectors.reserve(count);
  const std::uint8_t* p = bytes.data() + kFeatureFileHeaderBytes;
  for (std::uint64_t row = 0; row < count; ++row) {
    std::vector<double> values(dim);
    for (std::uint64_t col = 0; col < dim; ++col, p += 4) {
      const float f = std::bit_cast<float>(read_u32_le(p));
      if (!std::isfinite(f)) {
        fail(ErrorCategory::kParse, "feature file row " + std::to_string(row) +
                                        " has a non-finite value");
      }
      values[col] = static_cast<double>(f);
    }
    vectors.emplace_back(std::move(values));
  }
  return vectors;
}

std::vector<std::uint8_t> encode_feature_file(
    std::span<const FeatureVector> vectors) {
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().dim();
  if (vectors.size() > std::numeric_limits<std::uint32_t>::max() ||
      dim > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCategory::kValidation, "feature set too large for HMPF1");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFeatureFileHeaderBytes + vectors.size() * dim * 4);
  for (const auto c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
  write_u32_le(out, kFeatureFileVersion);
  write_u32_le(out, static_cast<std::uint32_t>(vectors.size()));
  write_u32_le(out, static_cast<std::uint32_t>(dim));
  for (std::size_t row = 0; row < vectors.size(); ++row) {
    const auto& v = vectors[row];
    if (v.dim() != dim) {
      fail(ErrorCategory::kValidation,
           "feature row " + std::to_string(row) + " has dim " +
               std::to_string(v.dim()) + ", expected " + std::to_string(dim));
    }
    for (const double x : v.values()) {
      const float f = static_cast<float>(x);
      if (!std::isfinite(f)) {
        fail(ErrorCategory::kValidation,
             "feature row " + std::to_string(row) + " overflows binary32");
      }
      write_u32_le(out, std::bit_cast<std::uint32_t>(f));
    }
  }
  return out;
}

std::vector<FeatureVector> load_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCategory::kIo, "cannot open feature file " + path.string());
  }
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return decode_feature_file(bytes);
  } catch (const Error& e) {
    fail(e.category(), path.string() + ": " + e.what());
  }
}

void save_feature_file(const std::filesystem::path& path,
                       std::span<const FeatureVector> vectors) {
  const auto bytes = encode_feature_file(vectors);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCategory::kIo, "cannot write feature file " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    fail(ErrorCategory::kIo, "write failed for " + path.string());
  }
}

}  // namespace hmpf
