#include "byte_io.hpp"

#include <fstream>
#include <iterator>

namespace slicer::detail {

void ByteWriter::put_packed(std::span<const std::uint32_t> values, int width) {
  std::uint64_t acc = 0;
  int filled = 0;
  for (std::uint32_t v : values) {
    acc = (acc << width) | (static_cast<std::uint64_t>(v) & ((std::uint64_t{1} << width) - 1));
    filled += width;
    while (filled >= 8) {
      filled -= 8;
      put_u8(static_cast<std::uint8_t>(acc >> filled));
    }
    acc &= (std::uint64_t{1} << filled) - 1;
  }
  if (filled > 0) {
    put_u8(static_cast<std::uint8_t>(acc << (8 - filled)));
  }
}

std::vector<std::uint32_t> ByteReader::get_packed(std::size_t count, int width) {
  const std::uint64_t nbytes = packed_bytes(count, width);
  require(nbytes);
  std::vector<std::uint32_t> out;
  out.reserve(count);
  std::uint64_t acc = 0;
  int filled = 0;
  std::size_t cursor = pos_;
  const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
  for (std::size_t i = 0; i < count; ++i) {
    while (filled < width) {
      acc = (acc << 8) | bytes_[cursor++];
      filled += 8;
    }
    filled -= width;
    out.push_back(static_cast<std::uint32_t>((acc >> filled) & mask));
    acc &= (std::uint64_t{1} << filled) - 1;
  }
  pos_ += nbytes;
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failure on '" + path.string() + "'");
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    throw IoError("write failure on '" + path.string() + "'");
  }
}

}  // namespace slicer::detail
