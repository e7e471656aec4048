#pragma once

// Little-endian byte and MSB-first bit packing helpers shared by the .tns
// and .sif codecs. Internal to the library.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "slicer/error.hpp"

namespace slicer::detail {

class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { bytes_.push_back(v); }
  void put_u16(std::uint16_t v) {
    put_u8(static_cast<std::uint8_t>(v));
    put_u8(static_cast<std::uint8_t>(v >> 8));
  }
  void put_u32(std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
      put_u8(static_cast<std::uint8_t>(v >> shift));
    }
  }
  void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
  void put_bytes(std::span<const std::uint8_t> data) {
    bytes_.insert(bytes_.end(), data.begin(), data.end());
  }

  /// Appends `values` packed at `width` bits each, MSB-first, zero-padded to
  /// the next byte boundary.
  void put_packed(std::span<const std::uint32_t> values, int width);

  std::size_t size() const noexcept { return bytes_.size(); }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> take() && { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t get_u8() {
    require(1);
    return bytes_[pos_++];
  }
  std::uint16_t get_u16() {
    require(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t get_u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  float get_f32() { return std::bit_cast<float>(get_u32()); }

  std::vector<std::uint32_t> get_packed(std::size_t count, int width);

  void skip(std::size_t n) {
    require(n);
    pos_ += n;
  }
  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void require(std::size_t n) const {
    if (n > remaining()) {
      throw TruncatedError("unexpected end of data: need " + std::to_string(n) +
                           " bytes at offset " + std::to_string(pos_) + ", have " +
                           std::to_string(remaining()));
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

/// Bytes occupied by `count` values of `width` bits after padding.
constexpr std::uint64_t packed_bytes(std::uint64_t count, int width) noexcept {
  return (count * static_cast<std::uint64_t>(width) + 7) / 8;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace slicer::detail
