// Brute-force reference selections and random profiles shared by the planner
// unit tests and the acceptance runner.
#pragma once

#include <cstddef>
#include <utility>

#include "slicer/channel.hpp"
#include "slicer/codec.hpp"
#include "slicer/planner.hpp"
#include "slicer/profile.hpp"
#include "slicer/tensor.hpp"

namespace slicer::testing {

inline ModelProfile random_profile(SplitMix64& rng, std::size_t depth) {
  ModelProfile p;
  p.input_bits = 8 * (1000 + rng.next() % 200000);
  double mem = 0.0;
  double dev = 0.0;
  double cdev = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    LayerProfile l;
    mem += 1e5 + rng.next_unit() * 5e6;
    dev += rng.next_unit() * 8.0;
    cdev += rng.next_unit() * 5.0;
    l.memory_bytes = mem;
    l.device_ms = dev;
    l.compressed_device_ms = cdev;
    l.server_ms = rng.next_unit() * 3.0;
    l.if_rows = static_cast<std::uint32_t>(1 + rng.next() % 64);
    l.if_cols = static_cast<std::uint32_t>(1 + rng.next() % 2048);
    p.layers.push_back(l);
  }
  p.compressed_full_pass_ms = cdev + rng.next_unit() * 2.0;
  return p;
}

/// Largest l in 1..depth satisfying every single-shot constraint, 0 if none.
inline std::size_t brute_force_single(const ModelProfile& p, const Constraints& c,
                                      const CodecConfig& theta, const DeviceTimeModel& model) {
  std::size_t best = 0;
  const double zeta = encode_time_estimate(theta, model);
  for (std::size_t ell = 1; ell <= p.depth(); ++ell) {
    const LayerProfile& l = p.layer(ell);
    const double buffer = model.buffer_bytes ? *model.buffer_bytes : l.dense_if_bits() / 8.0;
    const auto bits = payload_upper_bound(l.if_rows, l.if_cols, theta).total();
    const double latency = total_latency_single(p, ell, bits, c.channel, zeta).total_ms;
    if (p.memory_bytes(ell) + buffer <= c.memory_budget_bytes &&
        buffer <= c.buffer_budget_bytes && latency <= c.latency_budget_ms) {
      best = ell;
    }
  }
  return best;
}

/// Lexicographically largest (l, w) satisfying the AR constraints, (0, 0) if none.
inline std::pair<std::size_t, std::size_t> brute_force_ar(const ModelProfile& p,
                                                          const Constraints& c,
                                                          const CodecConfig& theta,
                                                          const DeviceTimeModel& model,
                                                          std::size_t w_max) {
  std::pair<std::size_t, std::size_t> best{0, 0};
  const double zeta = encode_time_estimate(theta, model);
  for (std::size_t ell = 1; ell <= p.depth(); ++ell) {
    const LayerProfile& l = p.layer(ell);
    const auto bits = payload_upper_bound(l.if_rows, l.if_cols, theta).total();
    for (std::size_t w = 1; w <= w_max; ++w) {
      const double latency = total_latency_ar(p, ell, w, bits, c.channel, zeta).total_ms;
      if (latency <= c.latency_budget_ms && static_cast<double>(bits) <= c.ar_offload_cap_bits) {
        best = std::max(best, std::pair{ell, w});
      }
    }
  }
  return best;
}

}  // namespace slicer::testing
