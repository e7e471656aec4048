#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slicer/channel.hpp"
#include "slicer/codec.hpp"
#include "slicer/profile.hpp"

namespace slicer {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Budgets of one front-end device. Absent limits are +inf.
struct Constraints {
  double latency_budget_ms = kUnbounded;    // D
  double memory_budget_bytes = kUnbounded;  // M
  double ar_offload_cap_bits = kUnbounded;  // M_ar, in bits
  double buffer_budget_bytes = kUnbounded;  // M_buf
  ChannelParams channel;
};

/// Offline-calibrated encode cost tables, looked up at the nearest grid
/// point (ties resolve to the smaller key).
struct DeviceTimeModel {
  struct AtkfPoint { double sparsity; double lambda; double ms; };
  struct SplitPoint { std::size_t blocks_plus; std::size_t blocks_minus; double ms; };
  struct QuantPoint { int bits; double ms; };

  std::vector<AtkfPoint> atkf;
  std::vector<SplitPoint> split;
  std::vector<QuantPoint> quant;
  /// Encode working-set size m_buf. Absent: the dense IF size of the split.
  std::optional<double> buffer_bytes;

  /// Single zero entry per table: encode time is free.
  static DeviceTimeModel zero();

  double atkf_ms(double sparsity, double lambda) const;
  double split_ms(std::size_t blocks_plus, std::size_t blocks_minus) const;
  double quant_ms(int bits) const;
};

struct PayloadBound {
  std::uint64_t value_bits = 0;
  std::uint64_t index_bits = 0;  // columns, row pointers, packing slack
  std::uint64_t meta_bits = 0;   // header, per-block fields, Q table, CRC
  std::uint64_t total() const noexcept { return value_bits + index_bits + meta_bits; }
};

/// Pre-execution bound on payload_bits_exact for any tensor of this shape
/// encoded with theta: every entry at q_bit (or the widest fixed width),
/// block overhead charged for min(M, max(1, k_keep)) blocks per plane.
PayloadBound payload_upper_bound(std::size_t rows, std::size_t cols, const CodecConfig& theta);
/// Same bound; additionally checks that nnz_plus + nnz_minus equals the ATKF
/// keep count for theta.sparsity (InvalidArgument otherwise).
PayloadBound payload_upper_bound(std::size_t rows, std::size_t cols, const CodecConfig& theta,
                                 std::size_t nnz_plus, std::size_t nnz_minus);

/// Bound for an explicit retained-entry count (used when auditing a stored
/// payload whose header sparsity was rounded to float32).
PayloadBound payload_bound_for_entries(std::size_t rows, std::size_t cols,
                                       const CodecConfig& theta, std::uint64_t entries);

/// zeta_hat = t_ATKF(s, lambda) + t_MS(M+, M-) + sum over blocks t_ABQ(q_m),
/// with q_m = q_bit in ABQ mode.
double encode_time_estimate(const CodecConfig& theta, const DeviceTimeModel& model);

enum class PlanMode { kSingleShot, kAr };

enum class Verdict { kFeasible, kMemory, kBuffer, kLatency, kOffloadCap };

const char* to_string(PlanMode mode);
const char* to_string(Verdict verdict);

/// Predicted quantities for one candidate split under a fixed theta.
struct SplitEstimate {
  std::size_t ell = 0;
  double memory_bytes = 0.0;
  double buffer_bytes = 0.0;
  double device_ms = 0.0;
  double compressed_device_ms = 0.0;
  std::uint64_t bound_bits = 0;
  LatencyBreakdown comm;  // transmit + encode only
};

struct TraceEntry {
  std::size_t ell = 0;
  std::size_t w = 0;
  double sparsity = 0.0;
  std::size_t blocks_plus = 0;
  std::size_t blocks_minus = 0;
  std::uint64_t bound_bits = 0;
  double latency_ms = 0.0;
  Verdict verdict = Verdict::kFeasible;
};

struct SplitPlan {
  PlanMode mode = PlanMode::kSingleShot;
  std::size_t ell = 0;
  std::size_t w = 1;
  CodecConfig theta;
  std::uint64_t predicted_bits = 0;
  LatencyBreakdown predicted_latency;
  bool feasible = false;
  std::vector<TraceEntry> trace;
};

/// Estimates for splits 1..depth.
std::vector<SplitEstimate> estimate_splits(const ModelProfile& profile, const ChannelParams& ch,
                                           const CodecConfig& theta,
                                           const DeviceTimeModel& model);

/// Deepest l with memory + buffer <= M, buffer <= M_buf and
/// device + comm <= D. Estimates must be ordered by ascending l.
/// No feasible split: feasible = false, l = 0.
SplitPlan select_deepest_single(std::span<const SplitEstimate> estimates,
                                const Constraints& limits, const CodecConfig& theta);

/// Largest (l, w) in lexicographic order (l first, then w) with
/// (w - 1) * full_pass + partial(l) + comm(l) <= D and bound_bits <= M_ar.
SplitPlan select_deepest_ar(std::span<const SplitEstimate> estimates, double full_pass_ms,
                            const Constraints& limits, const CodecConfig& theta,
                            std::size_t w_max);

SplitPlan select_split_single(const ModelProfile& profile, const Constraints& limits,
                              const CodecConfig& theta, const DeviceTimeModel& model);
SplitPlan select_split_ar(const ModelProfile& profile, const Constraints& limits,
                          const CodecConfig& theta, const DeviceTimeModel& model,
                          std::size_t w_max);

struct ParamSelection {
  bool feasible = false;
  double param = 0.0;
  double score = 0.0;
};

/// argmax score over perf_table entries with
/// compressed_memory_bytes + M_ar / 8 <= M; ties pick the smaller param.
ParamSelection select_compression_param(const ModelProfile& profile, const Constraints& limits);

struct SearchGrids {
  std::vector<std::size_t> block_grid{1, 2, 3, 4};
  std::vector<double> sparsity_grid{0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};

  /// (M+, M-) sweep order: by max, then min, then M+.
  /// For {1,2,3}: (1,1) (1,2) (2,1) (2,2) (1,3) (3,1) (2,3) (3,2) (3,3).
  std::vector<std::pair<std::size_t, std::size_t>> block_pairs() const;
};

/// Hierarchical search. For each split in retreat order (single-shot:
/// l = depth..1; AR: l descending, then w descending) sweep block pairs at
/// the smallest sparsity, then raise sparsity; the first feasible candidate
/// wins. Feasibility is judged from payload_upper_bound and
/// encode_time_estimate only. base supplies lambda, q_bit and delta; the
/// search always uses ABQ mode. Exhaustion: raw-input fallback, feasible =
/// false, full trace.
SplitPlan slicer_search(const ModelProfile& profile, const Constraints& limits,
                        const DeviceTimeModel& model, const SearchGrids& grids,
                        const CodecConfig& base, PlanMode mode, std::size_t w_max = 1);

}  // namespace slicer
