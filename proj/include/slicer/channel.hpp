#pragma once

#include <cstddef>
#include <cstdint>

#include "slicer/profile.hpp"

namespace slicer {

/// Wireless link: rate R (bit/s), bandwidth W (Hz), mean SNR gamma, outage
/// target epsilon. fading_variance is carried for configuration fidelity;
/// the closed-form outage expression uses gamma only.
struct ChannelParams {
  double rate_bps = 1e6;
  double bandwidth_hz = 10e6;
  double snr = 10.0;
  double epsilon = 1e-3;
  double fading_variance = 1.0;

  /// Throws InvalidArgument unless R, W, gamma > 0 and 0 < epsilon < 1.
  void validate() const;
  bool operator==(const ChannelParams&) const = default;
};

/// All times in milliseconds. comm_ms = transmit_ms + encode_ms and
/// total_ms = device_ms + comm_ms.
struct LatencyBreakdown {
  double device_ms = 0.0;
  double transmit_ms = 0.0;
  double encode_ms = 0.0;
  double comm_ms = 0.0;
  double total_ms = 0.0;
  std::uint64_t retx_factor = 1;
};

/// P_o(R) = 1 - exp(-(2^(R/W) - 1) / gamma).
double outage_probability(const ChannelParams& ch);

/// ceil(ln epsilon / ln P_o), at least 1. Throws InvalidArgument when P_o is 0
/// or 1 (the logarithm is undefined) or epsilon is outside (0, 1).
std::uint64_t retransmission_factor(double epsilon, double outage);

/// epsilon-outage communication latency for `bits` bits plus encode time.
LatencyBreakdown comm_latency(std::uint64_t bits, const ChannelParams& ch, double encode_ms);

/// L(l) = L_d(L_1:l) + L_c(l). Split 0 carries no device time.
LatencyBreakdown total_latency_single(const ModelProfile& profile, std::size_t ell,
                                      std::uint64_t bits, const ChannelParams& ch,
                                      double encode_ms);

/// L_AR(l, w) = (w - 1) L_d(l_1:depth) + L_d(l_1:l) + L_c(l) on the compressed
/// network. Throws InvalidArgument if w == 0 or compressed timings are missing.
LatencyBreakdown total_latency_ar(const ModelProfile& profile, std::size_t ell, std::size_t w,
                                  std::uint64_t bits, const ChannelParams& ch,
                                  double encode_ms);

}  // namespace slicer
