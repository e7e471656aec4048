#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace slicer {

/// Row-major N x K block of finite float32 values. Immutable once built;
/// higher-rank features are flattened to two dimensions by the caller.
class DenseTensor {
 public:
  /// Zero-filled tensor. Throws ShapeError if either dimension is zero.
  DenseTensor(std::size_t rows, std::size_t cols);
  /// Throws ShapeError on a size mismatch and NonFiniteError on NaN/Inf.
  DenseTensor(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const float> values() const noexcept { return values_; }
  float operator[](std::size_t flat) const { return values_[flat]; }
  float at(std::size_t row, std::size_t col) const {
    return values_[row * cols_ + col];
  }

  bool operator==(const DenseTensor& other) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<float> values_;
};

/// SplitMix64 finaliser. Shared by the fixture generator and the ATKF tie
/// breaker so that every port can reproduce the same streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// SplitMix64: state += 0x9E3779B97F4A7C15, output = mix64(state).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// 53-bit uniform in [0, 1).
  double next_unit() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

enum class Distribution { kUniform, kGaussian };

/// Deterministic fixture generator.
///
/// kUniform: one draw u per element, value = float(2u - 1), u in [0, 1).
/// kGaussian: two draws per element (Box-Muller, cosine branch only):
///   u1 = ((z1 >> 11) + 1) * 2^-53 in (0, 1], u2 = (z2 >> 11) * 2^-53,
///   value = float(sqrt(-2 ln u1) * cos(2 pi u2)).
/// Values are produced in row-major order from a single SplitMix64 stream
/// seeded with `seed`.
DenseTensor random_tensor(std::size_t rows, std::size_t cols,
                          std::uint64_t seed, Distribution dist);

/// `.tns` file: "TNS1" | u16 version (1) | u32 rows | u32 cols |
/// rows*cols f32 values, all little-endian.
DenseTensor load_tensor(const std::filesystem::path& path);
void save_tensor(const DenseTensor& tensor, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_tensor_bytes(const DenseTensor& tensor);
DenseTensor decode_tensor_bytes(std::span<const std::uint8_t> bytes);

}  // namespace slicer
