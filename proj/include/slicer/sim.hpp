#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "slicer/channel.hpp"
#include "slicer/codec.hpp"
#include "slicer/planner.hpp"
#include "slicer/profile.hpp"

namespace slicer {

enum class PolicyKind { kEcBaseline, kFixedSplit, kSlicer };

const char* to_string(PolicyKind kind);

struct SimPolicy {
  PolicyKind kind = PolicyKind::kEcBaseline;
  /// kFixedSplit: split layer and AR step count.
  std::size_t ell = 0;
  std::size_t w = 1;
  /// kFixedSplit: codec used at ell (default CodecConfig when absent).
  std::optional<CodecConfig> theta;
  /// kSlicer: grids and the lambda / q_bit / delta template.
  SearchGrids grids;
  CodecConfig base;
};

/// How the per-request uplink size is obtained.
enum class PayloadMode {
  kBound,    // B^UB of the planned configuration
  kEncoded,  // payload_bits_exact of a seeded gaussian IF, one per device
};

struct ArSettings {
  bool enabled = false;
  std::size_t tokens = 1;  // forward passes per request
  std::size_t w_max = 1;
};

struct SimConfig {
  std::size_t n_devices = 1;
  std::size_t requests_per_device = 1;
  SimPolicy policy;
  /// Device i uses channels[i % channels.size()].
  std::vector<ChannelParams> channels{ChannelParams{}};
  ModelProfile profile;
  /// Budgets for kSlicer planning; the channel field is replaced per device.
  Constraints constraints;
  DeviceTimeModel time_model = DeviceTimeModel::zero();
  std::uint64_t seed = 0;
  double think_time_ms = 0.0;
  /// Device i starts at a seeded uniform offset in [0, start_jitter_ms).
  double start_jitter_ms = 0.0;
  ArSettings ar;
  PayloadMode payload = PayloadMode::kBound;
  /// Stop processing events after this time. Absent: run to completion.
  std::optional<double> horizon_ms;

  /// Throws InvalidArgument on an inconsistent configuration.
  void validate() const;
};

/// What one device does for each of its requests.
struct DevicePlan {
  std::size_t ell = 0;
  std::size_t w = 1;
  bool planned_feasible = true;
  std::uint64_t bits = 0;
  LatencyBreakdown front;  // device compute + encode + transmission
  double server_ms = 0.0;
};

struct LatencyStats {
  std::size_t count = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

struct DeviceReport {
  std::size_t device = 0;
  DevicePlan plan;
  LatencyStats e2e_ms;
  LatencyStats uplink_ms;
  std::size_t completed = 0;
};

struct QueueSample {
  double time_ms = 0.0;
  std::size_t waiting = 0;
};

struct SimReport {
  PolicyKind policy = PolicyKind::kEcBaseline;
  std::size_t n_devices = 0;
  std::vector<DeviceReport> devices;
  LatencyStats e2e_ms;  // over all completed requests
  double busy_ms = 0.0;  // dev0 service time of completed requests
  double makespan_ms = 0.0;
  double throughput_per_s = 0.0;
  std::uint64_t uplink_bits = 0;  // requests delivered to dev0
  double bits_per_request = 0.0;
  std::size_t issued = 0;
  std::size_t completed = 0;
  std::size_t in_flight = 0;  // on a device, on the uplink or in service
  std::size_t queued = 0;
  std::size_t max_queue = 0;
  std::vector<QueueSample> queue_trace;

  double busy_per_request_ms() const noexcept {
    return completed == 0 ? 0.0 : busy_ms / static_cast<double>(completed);
  }
};

/// Per-device plan implied by cfg.policy for device `device`.
DevicePlan plan_device(const SimConfig& cfg, std::size_t device);

/// Closed-loop discrete-event run: each device issues its next request when
/// the previous one completes (plus think time); dev0 is a single FIFO
/// server. Simultaneous events order by (service completion, issue,
/// arrival), then device id.
SimReport run_simulation(const SimConfig& cfg);

/// alt / base for each headline metric (1 when both are zero).
struct PolicyComparison {
  SimReport base;
  SimReport alt;
  double busy_ratio = 1.0;
  double throughput_ratio = 1.0;
  double makespan_ratio = 1.0;
  double mean_e2e_ratio = 1.0;
  double uplink_bits_ratio = 1.0;
};

/// Throws InvalidArgument unless both configs describe the same workload
/// (devices, requests, seed, think time, jitter, horizon, AR token count).
PolicyComparison compare_policies(const SimConfig& base, const SimConfig& alt);

struct SweepPoint {
  std::size_t n_devices = 0;
  SimReport report;
};

std::vector<SweepPoint> scaling_sweep(const SimConfig& cfg, const std::vector<std::size_t>& ns);

/// CSV with one row per device and a trailing "all" row.
void write_report_csv(const SimReport& report, std::ostream& out);
/// CSV with one row per (policy, n) pair: throughput-vs-N plotting input.
void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& out);

}  // namespace slicer
