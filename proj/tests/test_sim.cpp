#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "slicer/config_io.hpp"
#include "slicer/error.hpp"
#include "slicer/sim.hpp"

using namespace slicer;

namespace {

const std::filesystem::path kData = SLICER_DATA_DIR;

SimConfig base_config(PolicyKind kind, std::size_t n = 1, std::size_t requests = 10) {
  SimConfig cfg = load_sim_config(kData / "sim_ec_baseline.json");
  cfg.policy = SimPolicy{};
  cfg.policy.kind = kind;
  cfg.n_devices = n;
  cfg.requests_per_device = requests;
  return cfg;
}

std::string dump(const SimReport& r) { return sim_report_to_json(r).dump(); }

}  // namespace

TEST(Simulation, SingleDeviceEcMatchesClosedForm) {
  const SimConfig cfg = base_config(PolicyKind::kEcBaseline, 1, 12);
  const SimReport r = run_simulation(cfg);
  const double full = cfg.profile.back_end_ms(0);
  EXPECT_DOUBLE_EQ(r.busy_ms, 12 * full);
  const double eq2 =
      total_latency_single(cfg.profile, 0, cfg.profile.input_bits, cfg.channels[0], 0.0).total_ms;
  EXPECT_NEAR(r.e2e_ms.mean, eq2 + full, 1e-9);
  EXPECT_NEAR(r.devices[0].uplink_ms.mean, eq2, 1e-9);
  EXPECT_EQ(r.completed, 12u);
  EXPECT_EQ(r.uplink_bits, 12 * cfg.profile.input_bits);
  EXPECT_NEAR(r.makespan_ms, 12 * (eq2 + full), 1e-6);
}

TEST(Simulation, SingleDeviceFixedSplitBusyTime) {
  SimConfig cfg = base_config(PolicyKind::kFixedSplit, 1, 9);
  cfg.policy.ell = 2;
  const SimReport r = run_simulation(cfg);
  EXPECT_DOUBLE_EQ(r.busy_ms, 9 * cfg.profile.back_end_ms(2));
  EXPECT_EQ(r.devices[0].plan.ell, 2u);
  CodecConfig theta;
  const auto& l = cfg.profile.layer(2);
  EXPECT_EQ(r.devices[0].plan.bits, payload_upper_bound(l.if_rows, l.if_cols, theta).total());
}

TEST(Simulation, SlicerHalvesServerTimeAtSixteenDevices) {
  const SimReport ec = run_simulation(base_config(PolicyKind::kEcBaseline, 16, 20));
  const SimReport sl = run_simulation(base_config(PolicyKind::kSlicer, 16, 20));
  EXPECT_LE(sl.busy_ms, ec.busy_ms / 2);
  EXPECT_LE(sl.busy_per_request_ms(), ec.busy_per_request_ms() / 2);
  for (const auto& d : sl.devices) EXPECT_GT(d.plan.ell, 0u);
}

TEST(Simulation, ScalingShapes) {
  const std::vector<std::size_t> ns{1, 2, 3, 4, 6, 8, 12, 16};
  const auto ec = scaling_sweep(base_config(PolicyKind::kEcBaseline, 1, 15), ns);
  const auto sl = scaling_sweep(base_config(PolicyKind::kSlicer, 1, 15), ns);
  const double ec_unit = ec[0].report.busy_ms;
  const double sl_unit = sl[0].report.busy_per_request_ms();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    EXPECT_NEAR(ec[i].report.busy_ms, ec_unit * static_cast<double>(ns[i]), 1e-9 * ec_unit * ns[i]);
    EXPECT_NEAR(sl[i].report.busy_per_request_ms(), sl_unit, 1e-12);
    EXPECT_LT(sl[i].report.busy_per_request_ms(), ec[i].report.busy_per_request_ms());
    EXPECT_GE(sl[i].report.throughput_per_s, ec[i].report.throughput_per_s);
  }
}

TEST(Simulation, EcSaturatesWhileSlicerKeepsScaling) {
  // Fast uplink, so EC is server-bound: its 10 ms service saturates dev0
  // once N * 10 ms exceeds the per-device request cycle.
  SimConfig ec_cfg = base_config(PolicyKind::kEcBaseline, 1, 30);
  ec_cfg.channels = {ChannelParams{.rate_bps = 2e8, .bandwidth_hz = 1e9}};
  SimConfig sl_cfg = ec_cfg;
  sl_cfg.policy.kind = PolicyKind::kSlicer;
  const auto ec = scaling_sweep(ec_cfg, {16, 32});
  const auto sl = scaling_sweep(sl_cfg, {16, 32});
  // Saturated server: throughput pinned at 1 / service time.
  const double cap = 1000.0 / ec_cfg.profile.back_end_ms(0);
  EXPECT_NEAR(ec[1].report.throughput_per_s, cap, 0.1 * cap);
  EXPECT_LT(ec[1].report.throughput_per_s / ec[0].report.throughput_per_s, 1.2);
  EXPECT_GT(sl[1].report.throughput_per_s, 2.0 * ec[1].report.throughput_per_s);
}

TEST(Simulation, DeterministicAndSeeded) {
  SimConfig cfg = base_config(PolicyKind::kSlicer, 5, 8);
  cfg.start_jitter_ms = 25.0;
  cfg.think_time_ms = 1.5;
  EXPECT_EQ(dump(run_simulation(cfg)), dump(run_simulation(cfg)));
  SimConfig other = cfg;
  other.seed += 1;
  EXPECT_NE(dump(run_simulation(cfg)), dump(run_simulation(other)));
}

TEST(Simulation, ConservationUnderHorizon) {
  for (double horizon : {1.0, 50.0, 333.3, 2000.0, 1e7}) {
    SimConfig cfg = base_config(PolicyKind::kEcBaseline, 7, 10);
    cfg.horizon_ms = horizon;
    cfg.start_jitter_ms = 5.0;
    const SimReport r = run_simulation(cfg);
    EXPECT_EQ(r.completed + r.in_flight + r.queued, r.issued);
    EXPECT_LE(r.busy_ms, horizon + 1e-9);
    double service = 0.0;
    for (const auto& d : r.devices) service += static_cast<double>(d.completed) * d.plan.server_ms;
    EXPECT_DOUBLE_EQ(r.busy_ms, service);
    for (const auto& q : r.queue_trace) EXPECT_LE(q.time_ms, horizon);
  }
}

TEST(Simulation, HeterogeneousChannels) {
  SimConfig cfg = base_config(PolicyKind::kEcBaseline, 4, 3);
  const SimReport r = run_simulation(cfg);
  // Devices 0 and 2 share the fast channel, 1 and 3 the slower one.
  EXPECT_DOUBLE_EQ(r.devices[0].plan.front.total_ms, r.devices[2].plan.front.total_ms);
  EXPECT_GT(r.devices[1].plan.front.total_ms, r.devices[0].plan.front.total_ms);
}

TEST(Simulation, AutoregressiveTimeline) {
  SimConfig cfg = base_config(PolicyKind::kFixedSplit, 1, 4);
  cfg.ar = {.enabled = true, .tokens = 5, .w_max = 3};
  cfg.policy.ell = 2;
  cfg.policy.w = 3;
  const SimReport r = run_simulation(cfg);
  const DevicePlan& plan = r.devices[0].plan;
  EXPECT_DOUBLE_EQ(plan.server_ms, cfg.profile.back_end_ms(2) + 2 * cfg.profile.back_end_ms(0));
  EXPECT_DOUBLE_EQ(plan.front.device_ms,
                   2 * cfg.profile.compressed_full_ms() + cfg.profile.compressed_device_ms(2));

  SimConfig slicer_ar = cfg;
  slicer_ar.policy = SimPolicy{.kind = PolicyKind::kSlicer};
  const SimReport s = run_simulation(slicer_ar);
  EXPECT_GE(s.devices[0].plan.w, 1u);
  EXPECT_LE(s.devices[0].plan.w, 3u);

  SimConfig missing = cfg;
  for (auto& l : missing.profile.layers) l.compressed_device_ms.reset();
  EXPECT_THROW(run_simulation(missing), InvalidArgument);
}

TEST(Simulation, EncodedPayloadStaysUnderBound) {
  SimConfig cfg = base_config(PolicyKind::kSlicer, 3, 2);
  cfg.payload = PayloadMode::kEncoded;
  const SimReport r = run_simulation(cfg);
  for (const auto& d : r.devices) {
    SimConfig bound_cfg = cfg;
    bound_cfg.payload = PayloadMode::kBound;
    EXPECT_LE(d.plan.bits, plan_device(bound_cfg, d.device).bits);
  }
}

TEST(Simulation, RejectsInvalidConfigs) {
  SimConfig cfg = base_config(PolicyKind::kEcBaseline);
  cfg.n_devices = 0;
  EXPECT_THROW(run_simulation(cfg), InvalidArgument);
  cfg = base_config(PolicyKind::kEcBaseline);
  cfg.requests_per_device = 0;
  EXPECT_THROW(run_simulation(cfg), InvalidArgument);
  cfg = base_config(PolicyKind::kFixedSplit);
  cfg.policy.ell = 9;
  EXPECT_THROW(run_simulation(cfg), InvalidArgument);
  cfg = base_config(PolicyKind::kEcBaseline);
  cfg.channels.clear();
  EXPECT_THROW(run_simulation(cfg), InvalidArgument);
}

TEST(ComparePolicies, RatiosAndWorkloadCheck) {
  const SimConfig a = base_config(PolicyKind::kEcBaseline, 4, 5);
  const PolicyComparison same = compare_policies(a, a);
  EXPECT_EQ(same.busy_ratio, 1.0);
  EXPECT_EQ(same.throughput_ratio, 1.0);
  EXPECT_EQ(same.makespan_ratio, 1.0);
  EXPECT_EQ(same.mean_e2e_ratio, 1.0);
  EXPECT_EQ(same.uplink_bits_ratio, 1.0);

  const SimConfig b = base_config(PolicyKind::kSlicer, 4, 5);
  const PolicyComparison cmp = compare_policies(a, b);
  EXPECT_LT(cmp.busy_ratio, 0.5);
  EXPECT_GT(cmp.throughput_ratio, 1.0);

  SimConfig other = b;
  other.requests_per_device = 6;
  EXPECT_THROW(compare_policies(a, other), InvalidArgument);
}

TEST(ReportCsv, HasHeaderAndRows) {
  const SimReport r = run_simulation(base_config(PolicyKind::kEcBaseline, 3, 2));
  std::ostringstream out;
  write_report_csv(r, out);
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0].rfind("device,ell,w,bits", 0), 0u);
  EXPECT_EQ(lines[4].rfind("all,", 0), 0u);
  for (const auto& l : lines) EXPECT_EQ(std::count(l.begin(), l.end(), ','), 11);

  std::ostringstream sweep;
  write_sweep_csv(scaling_sweep(base_config(PolicyKind::kEcBaseline), {1, 2}), sweep);
  const std::string text = sweep.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
