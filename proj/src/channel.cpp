#include "slicer/channel.hpp"

#include <cmath>
#include <string>

#include "slicer/error.hpp"

namespace slicer {

void ChannelParams::validate() const {
  if (!(rate_bps > 0.0) || !(bandwidth_hz > 0.0) || !(snr > 0.0)) {
    throw InvalidArgument("channel rate, bandwidth and SNR must be positive");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("outage target epsilon must lie in (0, 1)");
  }
}

double outage_probability(const ChannelParams& ch) {
  ch.validate();
  const double threshold = std::exp2(ch.rate_bps / ch.bandwidth_hz) - 1.0;
  return -std::expm1(-threshold / ch.snr);
}

std::uint64_t retransmission_factor(double epsilon, double outage) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("outage target epsilon must lie in (0, 1)");
  }
  if (!(outage > 0.0 && outage < 1.0)) {
    throw InvalidArgument("outage probability " + std::to_string(outage) +
                          " leaves ln(P_o) undefined or zero");
  }
  const double ratio = std::log(epsilon) / std::log(outage);
  const double nearest = std::round(ratio);
  double factor = std::ceil(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, std::abs(nearest))) {
    factor = nearest;
  }
  return factor < 1.0 ? 1 : static_cast<std::uint64_t>(factor);
}

LatencyBreakdown comm_latency(std::uint64_t bits, const ChannelParams& ch, double encode_ms) {
  LatencyBreakdown out;
  out.retx_factor = retransmission_factor(ch.epsilon, outage_probability(ch));
  out.transmit_ms = static_cast<double>(bits) / ch.rate_bps *
                    static_cast<double>(out.retx_factor) * 1000.0;
  out.encode_ms = encode_ms;
  out.comm_ms = out.transmit_ms + encode_ms;
  out.total_ms = out.comm_ms;
  return out;
}

LatencyBreakdown total_latency_single(const ModelProfile& profile, std::size_t ell,
                                      std::uint64_t bits, const ChannelParams& ch,
                                      double encode_ms) {
  LatencyBreakdown out = comm_latency(bits, ch, encode_ms);
  out.device_ms = profile.device_ms(ell);
  out.total_ms = out.device_ms + out.comm_ms;
  return out;
}

LatencyBreakdown total_latency_ar(const ModelProfile& profile, std::size_t ell, std::size_t w,
                                  std::uint64_t bits, const ChannelParams& ch,
                                  double encode_ms) {
  if (w == 0) {
    throw InvalidArgument("AR step count w must be at least 1");
  }
  LatencyBreakdown out = comm_latency(bits, ch, encode_ms);
  const double full = w > 1 ? profile.compressed_full_ms() : 0.0;
  out.device_ms = static_cast<double>(w - 1) * full + profile.compressed_device_ms(ell);
  out.total_ms = out.device_ms + out.comm_ms;
  return out;
}

}  // namespace slicer
