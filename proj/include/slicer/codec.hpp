#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "slicer/magnitude_split.hpp"
#include "slicer/tensor.hpp"

namespace slicer {

enum class QuantMode : std::uint8_t { kAbq = 0, kFixed = 1 };

/// Compression knobs: sparsity s, asymmetry lambda, per-sign block counts,
/// the ABQ ceiling q_bit with its DS budget delta, or a fixed width vector.
struct CodecConfig {
  double sparsity = 0.9;
  double lambda = 0.0;
  std::size_t blocks_plus = 1;
  std::size_t blocks_minus = 1;
  int q_bit = 8;
  double delta = 0.01;
  QuantMode mode = QuantMode::kAbq;
  /// kFixed only. Either one shared vector (size == blocks_plus ==
  /// blocks_minus) or plus entries followed by minus entries
  /// (size == blocks_plus + blocks_minus).
  std::vector<int> fixed_q;

  /// Throws InvalidArgument describing the first violated constraint.
  void validate() const;
  /// Requested widths for the blocks of one plane (kFixed only).
  std::vector<int> plane_widths(Sign sign) const;
  /// Widest code any block may use under this configuration.
  int max_value_bits() const;

  bool operator==(const CodecConfig&) const = default;
};

/// One quantised CSR block as carried on the wire.
struct EncodedBlock {
  Sign sign = Sign::kPlus;
  std::uint8_t bits = 8;
  float scale = 1.0f;
  float v_min = 0.0f;
  std::vector<std::uint32_t> row_ptr;
  std::vector<std::uint32_t> cols;
  std::vector<std::uint16_t> codes;

  std::size_t nnz() const noexcept { return codes.size(); }
  bool operator==(const EncodedBlock&) const = default;
};

/// Header echo plus the plus-plane blocks (descending magnitude) followed by
/// the minus-plane blocks.
struct CompressedIF {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  float sparsity = 0.0f;
  float lambda = 0.0f;
  std::uint8_t q_bit = 8;
  float delta = 0.0f;
  QuantMode mode = QuantMode::kAbq;
  std::uint16_t blocks_plus = 1;   // effective
  std::uint16_t blocks_minus = 1;  // effective
  std::vector<std::uint8_t> fixed_q;  // kFixed: one width per effective block
  std::vector<EncodedBlock> blocks;
  std::uint64_t payload_bits = 0;

  std::size_t nnz() const noexcept;
  bool operator==(const CompressedIF&) const = default;
};

inline constexpr std::uint64_t kSifHeaderBits = 256;    // magic .. M- fields
inline constexpr std::uint64_t kSifBlockMetaBits = 104;  // q, o, v_min, nnz
inline constexpr std::uint64_t kSifCrcBits = 32;

/// Packed width of a column index: ceil(log2 K), promoted to 1 for K = 1.
int column_bits(std::size_t cols) noexcept;

/// ATKF -> sign separation -> sort -> equal-cardinality blocks -> CSR ->
/// ABQ (or fixed widths). Deterministic in (x, cfg, seed).
CompressedIF encode(const DenseTensor& x, const CodecConfig& cfg, std::uint64_t seed);

/// Sum of dequantised blocks, minus-plane blocks negated. Throws
/// CorruptDataError if two blocks claim the same position or a block is
/// structurally invalid.
DenseTensor decode(const CompressedIF& c);

/// Exact size of serialize(c) in bits, padding, magic and CRC included.
std::uint64_t payload_bits_exact(const CompressedIF& c);

/// `.sif` wire format (little-endian):
///   "SIF1" | u16 version=1 | u32 N | u32 K | f32 s | f32 lambda | u8 q_bit |
///   f32 delta | u8 mode | u16 M+ | u16 M- | [mode 1: (M+ + M-) x u8 Q] |
///   per block { u8 q | f32 o | f32 v_min | u32 nnz | (N+1) x u32 row_ptr |
///               cols packed at column_bits(K) | codes packed at q }
///   | u32 CRC-32 of everything after the magic.
/// Packed sections are MSB-first and padded to a byte boundary each.
std::vector<std::uint8_t> serialize(const CompressedIF& c);
CompressedIF deserialize(std::span<const std::uint8_t> bytes);

CompressedIF load_compressed(const std::filesystem::path& path);
void save_compressed(const CompressedIF& c, const std::filesystem::path& path);

}  // namespace slicer
