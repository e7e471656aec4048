#include "slicer/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "byte_io.hpp"
#include "slicer/error.hpp"

namespace slicer {

namespace {

constexpr std::uint8_t kTensorMagic[4] = {'T', 'N', 'S', '1'};
constexpr std::uint16_t kTensorVersion = 1;

void check_shape(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("tensor dimensions must be positive, got " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
}

}  // namespace

DenseTensor::DenseTensor(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {
  check_shape(rows, cols);
  values_.assign(rows * cols, 0.0f);
}

DenseTensor::DenseTensor(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  check_shape(rows, cols);
  if (values_.size() != rows * cols) {
    throw ShapeError("expected " + std::to_string(rows * cols) + " values, got " +
                     std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NonFiniteError("non-finite value at flat index " + std::to_string(i));
    }
  }
}

DenseTensor random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed,
                          Distribution dist) {
  check_shape(rows, cols);
  SplitMix64 rng(seed);
  std::vector<float> values(rows * cols);
  for (float& v : values) {
    if (dist == Distribution::kUniform) {
      v = static_cast<float>(2.0 * rng.next_unit() - 1.0);
    } else {
      const double u1 = static_cast<double>((rng.next() >> 11) + 1) * 0x1.0p-53;
      const double u2 = rng.next_unit();
      v = static_cast<float>(std::sqrt(-2.0 * std::log(u1)) *
                             std::cos(2.0 * std::numbers::pi * u2));
    }
  }
  return DenseTensor(rows, cols, std::move(values));
}

std::vector<std::uint8_t> encode_tensor_bytes(const DenseTensor& tensor) {
  detail::ByteWriter w;
  w.put_bytes(kTensorMagic);
  w.put_u16(kTensorVersion);
  w.put_u32(static_cast<std::uint32_t>(tensor.rows()));
  w.put_u32(static_cast<std::uint32_t>(tensor.cols()));
  for (float v : tensor.values()) {
    w.put_f32(v);
  }
  return std::move(w).take();
}

DenseTensor decode_tensor_bytes(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4;
  if (bytes.size() < kHeaderBytes) {
    throw FormatError("tensor header too short (" + std::to_string(bytes.size()) + " bytes)");
  }
  if (!std::equal(std::begin(kTensorMagic), std::end(kTensorMagic), bytes.begin())) {
    throw FormatError("bad tensor magic");
  }
  detail::ByteReader r(bytes.subspan(4));
  const std::uint16_t version = r.get_u16();
  if (version != kTensorVersion) {
    throw FormatError("unsupported tensor version " + std::to_string(version));
  }
  const std::uint32_t rows = r.get_u32();
  const std::uint32_t cols = r.get_u32();
  check_shape(rows, cols);
  const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
  if (r.remaining() < count * 4) {
    throw TruncatedError("tensor payload truncated: expected " + std::to_string(count * 4) +
                         " bytes, have " + std::to_string(r.remaining()));
  }
  if (r.remaining() != count * 4) {
    throw FormatError("trailing bytes after tensor payload");
  }
  std::vector<float> values(count);
  for (float& v : values) {
    v = r.get_f32();
  }
  return DenseTensor(rows, cols, std::move(values));
}

DenseTensor load_tensor(const std::filesystem::path& path) {
  return decode_tensor_bytes(detail::read_file(path));
}

void save_tensor(const DenseTensor& tensor, const std::filesystem::path& path) {
  detail::write_file(path, encode_tensor_bytes(tensor));
}

}  // namespace slicer
