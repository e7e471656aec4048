#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace slicer {

inline constexpr int kMaxQuantBits = 16;

/// Affine quantiser parameters for one block: code c maps back to
/// c * scale + v_min. A constant block (v_max == v_min) has scale 1 and all
/// codes 0.
struct QuantSpec {
  int bits = 8;
  float scale = 1.0f;
  float v_min = 0.0f;
  float v_max = 0.0f;

  bool degenerate() const noexcept { return v_max == v_min; }
  bool operator==(const QuantSpec&) const = default;
};

struct QuantizedBlock {
  QuantSpec spec;
  std::vector<std::uint16_t> codes;

  bool operator==(const QuantizedBlock&) const = default;
};

/// Asymmetric integer quantisation at `bits` bits:
///   scale = (v_max - v_min) / (2^bits - 1)   (stored as float)
///   code  = clamp(round_half_away((v - v_min) * (2^bits - 1) / (v_max - v_min)),
///                 0, 2^bits - 1)
/// Throws InvalidArgument on an empty block or bits outside [1, 16].
QuantizedBlock aiq_quantize(std::span<const float> values, int bits);

/// c * scale + v_min, evaluated in double and rounded once to float.
float dequantize_code(std::uint32_t code, float scale, float v_min) noexcept;

std::vector<float> aiq_dequantize(const QuantizedBlock& block);

/// Integer mismatch between a reference code sequence at ref_bits and a
/// candidate at cand_bits: mean over i of |(ref_i >> (ref_bits - cand_bits)) - cand_i|.
/// Throws InvalidArgument on length mismatch, empty input, cand_bits > ref_bits
/// or widths outside [1, 16].
double ds_metric(std::span<const std::uint16_t> ref, int ref_bits,
                 std::span<const std::uint16_t> cand, int cand_bits);

struct BitSelection {
  int bits = 0;
  QuantizedBlock block;
  double distortion = 0.0;  // DS at the selected width
};

/// Greedy width search: quantise at q_bit for the reference codes, then walk
/// q = q_bit - 1, ..., 1 and stop at the first width whose DS exceeds delta.
/// The result is the last width that passed (q_bit if none did).
BitSelection abq_select_bits(std::span<const float> values, int q_bit, double delta);

/// Multi-level fixed assignment: block m is quantised at widths[m]. Blocks are
/// expected in descending-magnitude order. Throws InvalidArgument on a length
/// mismatch.
std::vector<QuantizedBlock> fixed_q_assign(std::span<const std::vector<float>> blocks,
                                           std::span<const int> widths);

}  // namespace slicer
