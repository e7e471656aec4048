#include "slicer/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <zlib.h>

#include "byte_io.hpp"
#include "slicer/abq.hpp"
#include "slicer/atkf.hpp"
#include "slicer/error.hpp"

namespace slicer {

namespace {

constexpr std::uint8_t kSifMagic[4] = {'S', 'I', 'F', '1'};
constexpr std::uint16_t kSifVersion = 1;
constexpr std::size_t kMaxBlocksPerPlane = 0xFFFF;

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large payloads.
  while (!bytes.empty()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size(), 1u << 30);
    crc = crc32(crc, bytes.data(), static_cast<uInt>(chunk));
    bytes = bytes.subspan(chunk);
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<EncodedBlock> encode_plane(const SignPlane& plane, const CodecConfig& cfg,
                                       std::size_t rows, std::size_t cols) {
  const std::size_t requested = plane.sign == Sign::kPlus ? cfg.blocks_plus : cfg.blocks_minus;
  const BlockPartition part = partition_equal(plane, requested);
  const std::vector<int> widths =
      cfg.mode == QuantMode::kFixed ? cfg.plane_widths(plane.sign) : std::vector<int>{};

  std::vector<EncodedBlock> out;
  out.reserve(part.block_count());
  for (std::size_t m = 0; m < part.block_count(); ++m) {
    CsrBlock csr = to_csr(plane, part.ranges[m], rows, cols);
    EncodedBlock block{.sign = plane.sign};
    block.row_ptr = std::move(csr.row_ptr);
    block.cols = std::move(csr.cols);
    const int fixed_width = cfg.mode == QuantMode::kFixed ? widths[m] : cfg.q_bit;
    if (csr.values.empty()) {
      block.bits = static_cast<std::uint8_t>(fixed_width);
      block.scale = 1.0f;
      block.v_min = 0.0f;
    } else {
      QuantizedBlock q = cfg.mode == QuantMode::kFixed
                             ? aiq_quantize(csr.values, fixed_width)
                             : abq_select_bits(csr.values, cfg.q_bit, cfg.delta).block;
      block.bits = static_cast<std::uint8_t>(q.spec.bits);
      block.scale = q.spec.scale;
      block.v_min = q.spec.v_min;
      block.codes = std::move(q.codes);
    }
    out.push_back(std::move(block));
  }
  return out;
}

void check_block(const EncodedBlock& b, std::uint32_t rows, std::uint32_t cols) {
  if (b.bits < 1 || b.bits > kMaxQuantBits) {
    throw CorruptDataError("block bit-width " + std::to_string(b.bits) + " outside [1, 16]");
  }
  if (b.row_ptr.size() != static_cast<std::size_t>(rows) + 1) {
    throw CorruptDataError("row pointer array has wrong length");
  }
  if (b.cols.size() != b.codes.size()) {
    throw CorruptDataError("column and code arrays differ in length");
  }
  if (b.row_ptr.front() != 0 || b.row_ptr.back() != b.nnz()) {
    throw CorruptDataError("row pointers do not span the block");
  }
  for (std::uint32_t r = 0; r < rows; ++r) {
    if (b.row_ptr[r] > b.row_ptr[r + 1]) {
      throw CorruptDataError("row pointers decrease at row " + std::to_string(r));
    }
    for (std::uint32_t j = b.row_ptr[r]; j < b.row_ptr[r + 1]; ++j) {
      if (b.cols[j] >= cols) {
        throw CorruptDataError("column index " + std::to_string(b.cols[j]) + " out of range");
      }
      if (j > b.row_ptr[r] && b.cols[j] <= b.cols[j - 1]) {
        throw CorruptDataError("columns not strictly increasing in row " + std::to_string(r));
      }
    }
  }
  const std::uint32_t max_code = (std::uint32_t{1} << b.bits) - 1;
  for (std::uint16_t code : b.codes) {
    if (code > max_code) {
      throw CorruptDataError("code " + std::to_string(code) + " overflows " +
                             std::to_string(b.bits) + " bits");
    }
  }
  if (b.nnz() > 0 && !(b.scale > 0.0f && std::isfinite(b.scale) && std::isfinite(b.v_min))) {
    throw CorruptDataError("invalid quantiser parameters");
  }
}

void check_header(const CompressedIF& c) {
  if (c.rows == 0 || c.cols == 0) {
    throw CorruptDataError("zero tensor dimension in header");
  }
  if (c.blocks_plus == 0 || c.blocks_minus == 0) {
    throw CorruptDataError("block count must be at least 1 per plane");
  }
  if (c.blocks.size() != static_cast<std::size_t>(c.blocks_plus) + c.blocks_minus) {
    throw CorruptDataError("block list does not match header block counts");
  }
  if (c.mode == QuantMode::kFixed && c.fixed_q.size() != c.blocks.size()) {
    throw CorruptDataError("fixed-Q table does not match block count");
  }
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    const Sign expected = i < c.blocks_plus ? Sign::kPlus : Sign::kMinus;
    if (c.blocks[i].sign != expected) {
      throw CorruptDataError("block " + std::to_string(i) + " has the wrong sign");
    }
  }
}

}  // namespace

void CodecConfig::validate() const {
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw InvalidArgument("sparsity must lie in [0, 1]");
  }
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw InvalidArgument("lambda must lie in [0, 1)");
  }
  if (blocks_plus < 1 || blocks_minus < 1 || blocks_plus > kMaxBlocksPerPlane ||
      blocks_minus > kMaxBlocksPerPlane) {
    throw InvalidArgument("block counts must lie in [1, 65535]");
  }
  if (q_bit < 1 || q_bit > kMaxQuantBits) {
    throw InvalidArgument("q_bit must lie in [1, 16]");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw InvalidArgument("delta must be finite and non-negative");
  }
  if (mode == QuantMode::kFixed) {
    const bool shared = blocks_plus == blocks_minus && fixed_q.size() == blocks_plus;
    const bool split = fixed_q.size() == blocks_plus + blocks_minus;
    if (!shared && !split) {
      throw InvalidArgument("fixed-Q vector of length " + std::to_string(fixed_q.size()) +
                            " does not match blocks " + std::to_string(blocks_plus) + "," +
                            std::to_string(blocks_minus));
    }
    for (int q : fixed_q) {
      if (q < 1 || q > kMaxQuantBits) {
        throw InvalidArgument("fixed-Q entries must lie in [1, 16]");
      }
    }
  }
}

std::vector<int> CodecConfig::plane_widths(Sign sign) const {
  if (fixed_q.size() == blocks_plus && blocks_plus == blocks_minus) {
    return fixed_q;
  }
  const auto first = fixed_q.begin();
  if (sign == Sign::kPlus) {
    return {first, first + static_cast<std::ptrdiff_t>(blocks_plus)};
  }
  return {first + static_cast<std::ptrdiff_t>(blocks_plus), fixed_q.end()};
}

int CodecConfig::max_value_bits() const {
  if (mode == QuantMode::kFixed && !fixed_q.empty()) {
    return std::max(q_bit, *std::max_element(fixed_q.begin(), fixed_q.end()));
  }
  return q_bit;
}

std::size_t CompressedIF::nnz() const noexcept {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.nnz();
  return n;
}

int column_bits(std::size_t cols) noexcept {
  if (cols <= 1) return 1;
  return static_cast<int>(std::bit_width(cols - 1));
}

CompressedIF encode(const DenseTensor& x, const CodecConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const AtkfResult filtered = atkf_filter(x, cfg.sparsity, cfg.lambda, seed);
  auto [plus_source, minus_source] = sign_separate(filtered.filtered);

  CompressedIF c;
  c.rows = static_cast<std::uint32_t>(x.rows());
  c.cols = static_cast<std::uint32_t>(x.cols());
  c.sparsity = static_cast<float>(cfg.sparsity);
  c.lambda = static_cast<float>(cfg.lambda);
  c.q_bit = static_cast<std::uint8_t>(cfg.q_bit);
  c.delta = static_cast<float>(cfg.delta);
  c.mode = cfg.mode;

  std::vector<EncodedBlock> plus = encode_plane(sort_nonzeros(plus_source), cfg, x.rows(), x.cols());
  std::vector<EncodedBlock> minus =
      encode_plane(sort_nonzeros(minus_source), cfg, x.rows(), x.cols());
  c.blocks_plus = static_cast<std::uint16_t>(plus.size());
  c.blocks_minus = static_cast<std::uint16_t>(minus.size());
  c.blocks = std::move(plus);
  c.blocks.insert(c.blocks.end(), std::make_move_iterator(minus.begin()),
                  std::make_move_iterator(minus.end()));
  if (c.mode == QuantMode::kFixed) {
    for (const auto& b : c.blocks) c.fixed_q.push_back(b.bits);
  }
  c.payload_bits = payload_bits_exact(c);
  return c;
}

DenseTensor decode(const CompressedIF& c) {
  check_header(c);
  const std::size_t total = static_cast<std::size_t>(c.rows) * c.cols;
  std::vector<float> out(total, 0.0f);
  std::vector<std::uint8_t> occupied(total, 0);
  for (const auto& b : c.blocks) {
    check_block(b, c.rows, c.cols);
    const float sign = b.sign == Sign::kPlus ? 1.0f : -1.0f;
    for (std::uint32_t r = 0; r < c.rows; ++r) {
      for (std::uint32_t j = b.row_ptr[r]; j < b.row_ptr[r + 1]; ++j) {
        const std::size_t flat = static_cast<std::size_t>(r) * c.cols + b.cols[j];
        if (occupied[flat]) {
          throw CorruptDataError("position " + std::to_string(flat) +
                                 " is claimed by more than one block");
        }
        occupied[flat] = 1;
        out[flat] = sign * dequantize_code(b.codes[j], b.scale, b.v_min);
      }
    }
  }
  return DenseTensor(c.rows, c.cols, std::move(out));
}

std::uint64_t payload_bits_exact(const CompressedIF& c) {
  std::uint64_t bytes = kSifHeaderBits / 8;
  if (c.mode == QuantMode::kFixed) {
    bytes += c.fixed_q.size();
  }
  const int cb = column_bits(c.cols);
  for (const auto& b : c.blocks) {
    bytes += kSifBlockMetaBits / 8;
    bytes += (static_cast<std::uint64_t>(c.rows) + 1) * 4;
    bytes += detail::packed_bytes(b.nnz(), cb);
    bytes += detail::packed_bytes(b.nnz(), b.bits);
  }
  bytes += kSifCrcBits / 8;
  return bytes * 8;
}

std::vector<std::uint8_t> serialize(const CompressedIF& c) {
  check_header(c);
  detail::ByteWriter w;
  w.put_bytes(kSifMagic);
  w.put_u16(kSifVersion);
  w.put_u32(c.rows);
  w.put_u32(c.cols);
  w.put_f32(c.sparsity);
  w.put_f32(c.lambda);
  w.put_u8(c.q_bit);
  w.put_f32(c.delta);
  w.put_u8(static_cast<std::uint8_t>(c.mode));
  w.put_u16(c.blocks_plus);
  w.put_u16(c.blocks_minus);
  if (c.mode == QuantMode::kFixed) {
    w.put_bytes(c.fixed_q);
  }
  const int cb = column_bits(c.cols);
  std::vector<std::uint32_t> codes;
  for (const auto& b : c.blocks) {
    check_block(b, c.rows, c.cols);
    w.put_u8(b.bits);
    w.put_f32(b.scale);
    w.put_f32(b.v_min);
    w.put_u32(static_cast<std::uint32_t>(b.nnz()));
    for (std::uint32_t p : b.row_ptr) w.put_u32(p);
    w.put_packed(b.cols, cb);
    codes.assign(b.codes.begin(), b.codes.end());
    w.put_packed(codes, b.bits);
  }
  const std::uint32_t crc = crc32_of(std::span(w.bytes()).subspan(4));
  w.put_u32(crc);
  return std::move(w).take();
}

CompressedIF deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kSifMagic), std::end(kSifMagic), bytes.begin())) {
    throw FormatError("bad .sif magic");
  }
  constexpr std::size_t kMinSize = kSifHeaderBits / 8 + kSifCrcBits / 8;
  if (bytes.size() < kMinSize) {
    throw TruncatedError(".sif stream shorter than its fixed header");
  }
  const auto body = bytes.subspan(0, bytes.size() - 4);
  detail::ByteReader r(body);
  r.skip(4);
  const std::uint16_t version = r.get_u16();
  if (version != kSifVersion) {
    throw FormatError("unsupported .sif version " + std::to_string(version));
  }

  CompressedIF c;
  c.rows = r.get_u32();
  c.cols = r.get_u32();
  c.sparsity = r.get_f32();
  c.lambda = r.get_f32();
  c.q_bit = r.get_u8();
  c.delta = r.get_f32();
  const std::uint8_t mode = r.get_u8();
  c.blocks_plus = r.get_u16();
  c.blocks_minus = r.get_u16();
  if (mode > 1) {
    throw FormatError("unknown quantisation mode " + std::to_string(mode));
  }
  c.mode = static_cast<QuantMode>(mode);
  if (c.rows == 0 || c.cols == 0) {
    throw FormatError("zero tensor dimension in .sif header");
  }
  if (c.q_bit < 1 || c.q_bit > kMaxQuantBits || !(c.sparsity >= 0.0f && c.sparsity <= 1.0f) ||
      !(c.lambda >= 0.0f && c.lambda < 1.0f) || !(c.delta >= 0.0f)) {
    throw FormatError("codec parameters in .sif header out of range");
  }
  if (c.blocks_plus == 0 || c.blocks_minus == 0) {
    throw FormatError("zero block count in .sif header");
  }
  const std::size_t block_count = static_cast<std::size_t>(c.blocks_plus) + c.blocks_minus;
  if (c.mode == QuantMode::kFixed) {
    r.require(block_count);
    c.fixed_q.resize(block_count);
    for (auto& q : c.fixed_q) q = r.get_u8();
  }

  // Length walk: the structure must exactly fill the stream before the CRC.
  const int cb = column_bits(c.cols);
  const std::uint64_t row_ptr_bytes = (static_cast<std::uint64_t>(c.rows) + 1) * 4;
  {
    detail::ByteReader walk = r;
    for (std::size_t i = 0; i < block_count; ++i) {
      const std::uint8_t q = walk.get_u8();
      walk.skip(8);
      const std::uint32_t nnz = walk.get_u32();
      if (q < 1 || q > kMaxQuantBits) {
        throw CorruptDataError("block bit-width " + std::to_string(q) + " outside [1, 16]");
      }
      walk.skip(row_ptr_bytes);
      walk.skip(detail::packed_bytes(nnz, cb));
      walk.skip(detail::packed_bytes(nnz, q));
    }
    if (walk.remaining() != 0) {
      throw FormatError(std::to_string(walk.remaining()) + " unexpected bytes before CRC");
    }
  }

  detail::ByteReader crc_reader(bytes.subspan(bytes.size() - 4));
  const std::uint32_t stored_crc = crc_reader.get_u32();
  if (stored_crc != crc32_of(body.subspan(4))) {
    throw ChecksumError(".sif CRC-32 mismatch");
  }

  c.blocks.reserve(block_count);
  for (std::size_t i = 0; i < block_count; ++i) {
    EncodedBlock b{.sign = i < c.blocks_plus ? Sign::kPlus : Sign::kMinus};
    b.bits = r.get_u8();
    b.scale = r.get_f32();
    b.v_min = r.get_f32();
    const std::uint32_t nnz = r.get_u32();
    b.row_ptr.resize(static_cast<std::size_t>(c.rows) + 1);
    for (auto& p : b.row_ptr) p = r.get_u32();
    b.cols = r.get_packed(nnz, cb);
    const std::vector<std::uint32_t> codes = r.get_packed(nnz, b.bits);
    b.codes.assign(codes.begin(), codes.end());
    check_block(b, c.rows, c.cols);
    c.blocks.push_back(std::move(b));
  }
  check_header(c);
  if (c.mode == QuantMode::kFixed) {
    for (std::size_t i = 0; i < block_count; ++i) {
      if (c.fixed_q[i] != c.blocks[i].bits) {
        throw CorruptDataError("fixed-Q table disagrees with block " + std::to_string(i));
      }
    }
  }
  c.payload_bits = payload_bits_exact(c);
  return c;
}

CompressedIF load_compressed(const std::filesystem::path& path) {
  return deserialize(detail::read_file(path));
}

void save_compressed(const CompressedIF& c, const std::filesystem::path& path) {
  detail::write_file(path, serialize(c));
}

}  // namespace slicer
