#include "slicer/planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slicer/atkf.hpp"
#include "slicer/error.hpp"

namespace slicer {

namespace {

template <typename Points, typename Distance, typename Key>
double nearest_ms(const Points& points, const char* table, Distance distance, Key key) {
  if (points.empty()) {
    throw InvalidArgument(std::string("device time model has an empty ") + table + " table");
  }
  const auto* best = &points.front();
  for (const auto& p : points) {
    const double d = distance(p);
    const double best_d = distance(*best);
    if (d < best_d || (d == best_d && key(p) < key(*best))) {
      best = &p;
    }
  }
  return best->ms;
}

double buffer_for(const DeviceTimeModel& model, std::uint64_t dense_bits) {
  return model.buffer_bytes ? *model.buffer_bytes : static_cast<double>(dense_bits) / 8.0;
}

void fill_fallback(SplitPlan& plan, const ModelProfile& profile, const Constraints& limits) {
  plan.ell = 0;
  plan.w = 1;
  plan.feasible = false;
  plan.predicted_bits = profile.input_bits;
  plan.predicted_latency =
      total_latency_single(profile, 0, profile.input_bits, limits.channel, 0.0);
}

Verdict judge_single(const SplitEstimate& e, const Constraints& limits, double* latency) {
  *latency = e.device_ms + e.comm.comm_ms;
  if (e.memory_bytes + e.buffer_bytes > limits.memory_budget_bytes) return Verdict::kMemory;
  if (e.buffer_bytes > limits.buffer_budget_bytes) return Verdict::kBuffer;
  if (*latency > limits.latency_budget_ms) return Verdict::kLatency;
  return Verdict::kFeasible;
}

Verdict judge_ar(const SplitEstimate& e, std::size_t w, double full_pass_ms,
                 const Constraints& limits, double* latency) {
  *latency = static_cast<double>(w - 1) * full_pass_ms + e.compressed_device_ms + e.comm.comm_ms;
  if (*latency > limits.latency_budget_ms) return Verdict::kLatency;
  if (static_cast<double>(e.bound_bits) > limits.ar_offload_cap_bits) return Verdict::kOffloadCap;
  return Verdict::kFeasible;
}

LatencyBreakdown with_device(LatencyBreakdown comm, double device_ms) {
  comm.device_ms = device_ms;
  comm.total_ms = device_ms + comm.comm_ms;
  return comm;
}

}  // namespace

DeviceTimeModel DeviceTimeModel::zero() {
  DeviceTimeModel m;
  m.atkf.push_back({0.0, 0.0, 0.0});
  m.split.push_back({1, 1, 0.0});
  m.quant.push_back({8, 0.0});
  return m;
}

double DeviceTimeModel::atkf_ms(double sparsity, double lambda) const {
  return nearest_ms(
      atkf, "ATKF",
      [&](const AtkfPoint& p) {
        return std::hypot(p.sparsity - sparsity, p.lambda - lambda);
      },
      [](const AtkfPoint& p) { return std::pair(p.sparsity, p.lambda); });
}

double DeviceTimeModel::split_ms(std::size_t blocks_plus, std::size_t blocks_minus) const {
  return nearest_ms(
      split, "magnitude-split",
      [&](const SplitPoint& p) {
        return std::hypot(static_cast<double>(p.blocks_plus) - static_cast<double>(blocks_plus),
                          static_cast<double>(p.blocks_minus) - static_cast<double>(blocks_minus));
      },
      [](const SplitPoint& p) { return std::pair(p.blocks_plus, p.blocks_minus); });
}

double DeviceTimeModel::quant_ms(int bits) const {
  return nearest_ms(
      quant, "ABQ", [&](const QuantPoint& p) { return std::abs(p.bits - bits); },
      [](const QuantPoint& p) { return p.bits; });
}

PayloadBound payload_upper_bound(std::size_t rows, std::size_t cols, const CodecConfig& theta) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("IF shape must be positive");
  }
  return payload_bound_for_entries(rows, cols, theta, keep_count(theta.sparsity, rows * cols));
}

PayloadBound payload_bound_for_entries(std::size_t rows, std::size_t cols,
                                       const CodecConfig& theta, std::uint64_t k_keep) {
  theta.validate();
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("IF shape must be positive");
  }
  // A plane never holds more than k_keep entries, so it never splits into
  // more than max(1, k_keep) blocks.
  const std::uint64_t plane_cap = std::max<std::uint64_t>(1, k_keep);
  const std::uint64_t blocks = std::min<std::uint64_t>(theta.blocks_plus, plane_cap) +
                               std::min<std::uint64_t>(theta.blocks_minus, plane_cap);
  PayloadBound b;
  b.value_bits = k_keep * static_cast<std::uint64_t>(theta.max_value_bits());
  // Two packed sections per non-empty block, each padded by at most 7 bits.
  b.index_bits = k_keep * static_cast<std::uint64_t>(column_bits(cols)) +
                 blocks * (static_cast<std::uint64_t>(rows) + 1) * 32 +
                 std::min(blocks, k_keep) * 14;
  b.meta_bits = kSifHeaderBits + blocks * kSifBlockMetaBits + kSifCrcBits;
  if (theta.mode == QuantMode::kFixed) {
    b.meta_bits += blocks * 8;
  }
  return b;
}

PayloadBound payload_upper_bound(std::size_t rows, std::size_t cols, const CodecConfig& theta,
                                 std::size_t nnz_plus, std::size_t nnz_minus) {
  const std::size_t k_keep = keep_count(theta.sparsity, rows * cols);
  if (nnz_plus + nnz_minus != k_keep) {
    throw InvalidArgument("nonzero split " + std::to_string(nnz_plus) + "+" +
                          std::to_string(nnz_minus) + " disagrees with keep count " +
                          std::to_string(k_keep));
  }
  return payload_upper_bound(rows, cols, theta);
}

double encode_time_estimate(const CodecConfig& theta, const DeviceTimeModel& model) {
  double ms = model.atkf_ms(theta.sparsity, theta.lambda) +
              model.split_ms(theta.blocks_plus, theta.blocks_minus);
  if (theta.mode == QuantMode::kFixed) {
    for (Sign sign : {Sign::kPlus, Sign::kMinus}) {
      for (int q : theta.plane_widths(sign)) ms += model.quant_ms(q);
    }
  } else {
    ms += static_cast<double>(theta.blocks_plus + theta.blocks_minus) * model.quant_ms(theta.q_bit);
  }
  return ms;
}

const char* to_string(PlanMode mode) {
  return mode == PlanMode::kSingleShot ? "single_shot" : "ar";
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kFeasible: return "feasible";
    case Verdict::kMemory: return "memory";
    case Verdict::kBuffer: return "buffer";
    case Verdict::kLatency: return "latency";
    case Verdict::kOffloadCap: return "offload_cap";
  }
  return "unknown";
}

std::vector<SplitEstimate> estimate_splits(const ModelProfile& profile, const ChannelParams& ch,
                                           const CodecConfig& theta,
                                           const DeviceTimeModel& model) {
  profile.validate();
  const double zeta = encode_time_estimate(theta, model);
  std::vector<SplitEstimate> out;
  out.reserve(profile.depth());
  for (std::size_t ell = 1; ell <= profile.depth(); ++ell) {
    const LayerProfile& layer = profile.layer(ell);
    SplitEstimate e;
    e.ell = ell;
    e.memory_bytes = layer.memory_bytes;
    e.buffer_bytes = buffer_for(model, layer.dense_if_bits());
    e.device_ms = layer.device_ms;
    e.compressed_device_ms = layer.compressed_device_ms.value_or(0.0);
    e.bound_bits = payload_upper_bound(layer.if_rows, layer.if_cols, theta).total();
    e.comm = comm_latency(e.bound_bits, ch, zeta);
    out.push_back(e);
  }
  return out;
}

SplitPlan select_deepest_single(std::span<const SplitEstimate> estimates,
                                const Constraints& limits, const CodecConfig& theta) {
  SplitPlan plan{.mode = PlanMode::kSingleShot, .theta = theta};
  for (auto it = estimates.rbegin(); it != estimates.rend(); ++it) {
    double latency = 0.0;
    const Verdict v = judge_single(*it, limits, &latency);
    plan.trace.push_back({.ell = it->ell, .w = 1, .sparsity = theta.sparsity,
                          .blocks_plus = theta.blocks_plus, .blocks_minus = theta.blocks_minus,
                          .bound_bits = it->bound_bits, .latency_ms = latency, .verdict = v});
    if (v == Verdict::kFeasible) {
      plan.ell = it->ell;
      plan.feasible = true;
      plan.predicted_bits = it->bound_bits;
      plan.predicted_latency = with_device(it->comm, it->device_ms);
      return plan;
    }
  }
  plan.ell = 0;
  plan.feasible = false;
  return plan;
}

SplitPlan select_deepest_ar(std::span<const SplitEstimate> estimates, double full_pass_ms,
                            const Constraints& limits, const CodecConfig& theta,
                            std::size_t w_max) {
  if (w_max == 0) {
    throw InvalidArgument("w_max must be at least 1");
  }
  SplitPlan plan{.mode = PlanMode::kAr, .theta = theta};
  for (auto it = estimates.rbegin(); it != estimates.rend(); ++it) {
    for (std::size_t w = w_max; w >= 1; --w) {
      double latency = 0.0;
      const Verdict v = judge_ar(*it, w, full_pass_ms, limits, &latency);
      plan.trace.push_back({.ell = it->ell, .w = w, .sparsity = theta.sparsity,
                            .blocks_plus = theta.blocks_plus, .blocks_minus = theta.blocks_minus,
                            .bound_bits = it->bound_bits, .latency_ms = latency, .verdict = v});
      if (v == Verdict::kFeasible) {
        plan.ell = it->ell;
        plan.w = w;
        plan.feasible = true;
        plan.predicted_bits = it->bound_bits;
        plan.predicted_latency = with_device(
            it->comm, static_cast<double>(w - 1) * full_pass_ms + it->compressed_device_ms);
        return plan;
      }
    }
  }
  plan.ell = 0;
  plan.w = 1;
  plan.feasible = false;
  return plan;
}

SplitPlan select_split_single(const ModelProfile& profile, const Constraints& limits,
                              const CodecConfig& theta, const DeviceTimeModel& model) {
  const auto estimates = estimate_splits(profile, limits.channel, theta, model);
  SplitPlan plan = select_deepest_single(estimates, limits, theta);
  if (!plan.feasible) fill_fallback(plan, profile, limits);
  return plan;
}

SplitPlan select_split_ar(const ModelProfile& profile, const Constraints& limits,
                          const CodecConfig& theta, const DeviceTimeModel& model,
                          std::size_t w_max) {
  if (!profile.has_compressed_timings()) {
    throw InvalidArgument("AR planning needs compressed-network timings in the profile");
  }
  const auto estimates = estimate_splits(profile, limits.channel, theta, model);
  SplitPlan plan = select_deepest_ar(estimates, profile.compressed_full_ms(), limits, theta, w_max);
  if (!plan.feasible) {
    fill_fallback(plan, profile, limits);
    plan.mode = PlanMode::kAr;
  }
  return plan;
}

ParamSelection select_compression_param(const ModelProfile& profile, const Constraints& limits) {
  ParamSelection best;
  const double offload_bytes = limits.ar_offload_cap_bits / 8.0;
  for (const auto& entry : profile.perf_table) {
    if (entry.compressed_memory_bytes + offload_bytes > limits.memory_budget_bytes) continue;
    if (!best.feasible || entry.score > best.score ||
        (entry.score == best.score && entry.param < best.param)) {
      best = {.feasible = true, .param = entry.param, .score = entry.score};
    }
  }
  return best;
}

std::vector<std::pair<std::size_t, std::size_t>> SearchGrids::block_pairs() const {
  std::vector<std::size_t> grid = block_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a : grid) {
    for (std::size_t b : grid) pairs.emplace_back(a, b);
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    const auto kx = std::tuple(std::max(x.first, x.second), std::min(x.first, x.second), x.first);
    const auto ky = std::tuple(std::max(y.first, y.second), std::min(y.first, y.second), y.first);
    return kx < ky;
  });
  return pairs;
}

SplitPlan slicer_search(const ModelProfile& profile, const Constraints& limits,
                        const DeviceTimeModel& model, const SearchGrids& grids,
                        const CodecConfig& base, PlanMode mode, std::size_t w_max) {
  profile.validate();
  if (grids.block_grid.empty() || grids.sparsity_grid.empty()) {
    throw InvalidArgument("search grids must be non-empty");
  }
  if (mode == PlanMode::kAr) {
    if (w_max == 0) throw InvalidArgument("w_max must be at least 1");
    if (!profile.has_compressed_timings()) {
      throw InvalidArgument("AR search needs compressed-network timings in the profile");
    }
  }
  std::vector<double> sparsities = grids.sparsity_grid;
  std::sort(sparsities.begin(), sparsities.end());
  const auto block_pairs = grids.block_pairs();

  // Splits in retreat order.
  std::vector<std::pair<std::size_t, std::size_t>> splits;
  for (std::size_t ell = profile.depth(); ell >= 1; --ell) {
    if (mode == PlanMode::kSingleShot) {
      splits.emplace_back(ell, 1);
    } else {
      for (std::size_t w = w_max; w >= 1; --w) splits.emplace_back(ell, w);
    }
  }
  const double full_pass = mode == PlanMode::kAr ? profile.compressed_full_ms() : 0.0;

  SplitPlan plan{.mode = mode, .theta = base};
  for (const auto& [ell, w] : splits) {
    const LayerProfile& layer = profile.layer(ell);
    for (double s : sparsities) {
      for (const auto& [mp, mm] : block_pairs) {
        CodecConfig theta = base;
        theta.mode = QuantMode::kAbq;
        theta.fixed_q.clear();
        theta.sparsity = s;
        theta.blocks_plus = mp;
        theta.blocks_minus = mm;
        SplitEstimate e;
        e.ell = ell;
        e.memory_bytes = layer.memory_bytes;
        e.buffer_bytes = buffer_for(model, layer.dense_if_bits());
        e.device_ms = layer.device_ms;
        e.compressed_device_ms = layer.compressed_device_ms.value_or(0.0);
        e.bound_bits = payload_upper_bound(layer.if_rows, layer.if_cols, theta).total();
        e.comm = comm_latency(e.bound_bits, limits.channel, encode_time_estimate(theta, model));

        double latency = 0.0;
        const Verdict v = mode == PlanMode::kSingleShot
                              ? judge_single(e, limits, &latency)
                              : judge_ar(e, w, full_pass, limits, &latency);
        plan.trace.push_back({.ell = ell, .w = w, .sparsity = s, .blocks_plus = mp,
                              .blocks_minus = mm, .bound_bits = e.bound_bits,
                              .latency_ms = latency, .verdict = v});
        if (v == Verdict::kFeasible) {
          plan.ell = ell;
          plan.w = w;
          plan.theta = theta;
          plan.feasible = true;
          plan.predicted_bits = e.bound_bits;
          const double device = mode == PlanMode::kSingleShot
                                    ? e.device_ms
                                    : static_cast<double>(w - 1) * full_pass + e.compressed_device_ms;
          plan.predicted_latency = with_device(e.comm, device);
          return plan;
        }
      }
    }
  }
  fill_fallback(plan, profile, limits);
  return plan;
}

}  // namespace slicer
