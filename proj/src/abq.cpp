#include "slicer/abq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "slicer/error.hpp"

namespace slicer {

namespace {

void check_bits(int bits, const char* what) {
  if (bits < 1 || bits > kMaxQuantBits) {
    throw InvalidArgument(std::string(what) + " must lie in [1, 16], got " +
                          std::to_string(bits));
  }
}

}  // namespace

QuantizedBlock aiq_quantize(std::span<const float> values, int bits) {
  if (values.empty()) {
    throw InvalidArgument("cannot quantise an empty block");
  }
  check_bits(bits, "bit-width");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  QuantizedBlock out;
  out.spec.bits = bits;
  out.spec.v_min = *lo;
  out.spec.v_max = *hi;
  out.codes.assign(values.size(), 0);
  if (out.spec.degenerate()) {
    out.spec.scale = 1.0f;
    return out;
  }

  const std::uint32_t levels = (std::uint32_t{1} << bits) - 1;
  const double range = static_cast<double>(out.spec.v_max) - static_cast<double>(out.spec.v_min);
  out.spec.scale = static_cast<float>(range / levels);
  if (!(out.spec.scale > 0.0f)) {
    out.spec.scale = std::numeric_limits<float>::denorm_min();
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = (static_cast<double>(values[i]) - out.spec.v_min) * levels / range;
    const double code = std::clamp(std::round(t), 0.0, static_cast<double>(levels));
    out.codes[i] = static_cast<std::uint16_t>(code);
  }
  return out;
}

float dequantize_code(std::uint32_t code, float scale, float v_min) noexcept {
  return static_cast<float>(static_cast<double>(code) * scale + static_cast<double>(v_min));
}

std::vector<float> aiq_dequantize(const QuantizedBlock& block) {
  std::vector<float> out(block.codes.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = dequantize_code(block.codes[i], block.spec.scale, block.spec.v_min);
  }
  return out;
}

double ds_metric(std::span<const std::uint16_t> ref, int ref_bits,
                 std::span<const std::uint16_t> cand, int cand_bits) {
  if (ref.size() != cand.size()) {
    throw InvalidArgument("DS operands differ in length (" + std::to_string(ref.size()) +
                          " vs " + std::to_string(cand.size()) + ")");
  }
  if (ref.empty()) {
    throw InvalidArgument("DS of empty sequences is undefined");
  }
  check_bits(ref_bits, "reference width");
  check_bits(cand_bits, "candidate width");
  if (cand_bits > ref_bits) {
    throw InvalidArgument("candidate width exceeds reference width");
  }
  const int shift = ref_bits - cand_bits;
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const std::int64_t shifted = ref[i] >> shift;
    sum += static_cast<std::uint64_t>(std::llabs(shifted - static_cast<std::int64_t>(cand[i])));
  }
  return static_cast<double>(sum) / static_cast<double>(ref.size());
}

BitSelection abq_select_bits(std::span<const float> values, int q_bit, double delta) {
  check_bits(q_bit, "q_bit");
  if (!(delta >= 0.0)) {
    throw InvalidArgument("delta must be non-negative");
  }
  BitSelection best{.bits = q_bit, .block = aiq_quantize(values, q_bit), .distortion = 0.0};
  const std::vector<std::uint16_t> reference = best.block.codes;
  for (int q = q_bit - 1; q >= 1; --q) {
    QuantizedBlock candidate = aiq_quantize(values, q);
    const double ds = ds_metric(reference, q_bit, candidate.codes, q);
    if (ds > delta) {
      break;
    }
    best = {.bits = q, .block = std::move(candidate), .distortion = ds};
  }
  return best;
}

std::vector<QuantizedBlock> fixed_q_assign(std::span<const std::vector<float>> blocks,
                                           std::span<const int> widths) {
  if (blocks.size() != widths.size()) {
    throw InvalidArgument("fixed-Q vector has " + std::to_string(widths.size()) +
                          " entries for " + std::to_string(blocks.size()) + " blocks");
  }
  std::vector<QuantizedBlock> out;
  out.reserve(blocks.size());
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    out.push_back(aiq_quantize(blocks[m], widths[m]));
  }
  return out;
}

}  // namespace slicer
