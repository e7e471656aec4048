#include "slicer/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <queue>
#include <string>
#include <tuple>

#include "slicer/error.hpp"
#include "slicer/tensor.hpp"

namespace slicer {

namespace {

enum class EventType : int { kServiceDone = 0, kIssue = 1, kArrival = 2 };

struct Event {
  double time;
  EventType type;
  std::size_t device;
  std::uint64_t seq;

  auto key() const { return std::tuple(time, static_cast<int>(type), device, seq); }
  bool operator>(const Event& other) const { return key() > other.key(); }
};

struct Request {
  std::size_t device = 0;
  double issued_at = 0.0;
};

LatencyStats summarize(std::vector<double> samples) {
  LatencyStats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(samples.size());
  // Nearest-rank percentiles.
  auto rank = [&](double p) {
    const auto n = static_cast<double>(samples.size());
    const auto idx = static_cast<std::size_t>(std::max(1.0, std::ceil(p * n))) - 1;
    return samples[std::min(idx, samples.size() - 1)];
  };
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  s.p99 = rank(0.99);
  s.max = samples.back();
  return s;
}

double ratio(double alt, double base) {
  if (alt == 0.0 && base == 0.0) return 1.0;
  return alt / base;
}

std::uint64_t device_seed(std::uint64_t seed, std::size_t device) {
  return mix64(seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(device) + 1));
}

std::uint64_t payload_bits(const SimConfig& cfg, std::size_t device, const LayerProfile& layer,
                           const CodecConfig& theta) {
  if (cfg.payload == PayloadMode::kBound) {
    return payload_upper_bound(layer.if_rows, layer.if_cols, theta).total();
  }
  const std::uint64_t s = device_seed(cfg.seed, device);
  const DenseTensor x = random_tensor(layer.if_rows, layer.if_cols, s, Distribution::kGaussian);
  return payload_bits_exact(encode(x, theta, s));
}

}  // namespace

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kEcBaseline: return "ec_baseline";
    case PolicyKind::kFixedSplit: return "fixed_split";
    case PolicyKind::kSlicer: return "slicer";
  }
  return "unknown";
}

void SimConfig::validate() const {
  if (n_devices == 0) throw InvalidArgument("n_devices must be at least 1");
  if (requests_per_device == 0) throw InvalidArgument("requests_per_device must be at least 1");
  if (channels.empty()) throw InvalidArgument("at least one channel is required");
  for (const auto& ch : channels) ch.validate();
  profile.validate();
  if (!(think_time_ms >= 0.0) || !(start_jitter_ms >= 0.0)) {
    throw InvalidArgument("think time and start jitter must be non-negative");
  }
  if (horizon_ms && !(*horizon_ms > 0.0)) throw InvalidArgument("horizon must be positive");
  if (ar.enabled) {
    if (ar.tokens == 0 || ar.w_max == 0) {
      throw InvalidArgument("AR mode needs tokens >= 1 and w_max >= 1");
    }
    if (!profile.has_compressed_timings()) {
      throw InvalidArgument("AR mode needs compressed-network timings in the profile");
    }
  }
  if (policy.kind == PolicyKind::kFixedSplit) {
    if (policy.ell > profile.depth()) {
      throw InvalidArgument("fixed split " + std::to_string(policy.ell) +
                            " exceeds profile depth " + std::to_string(profile.depth()));
    }
    if (policy.w == 0 || (ar.enabled && policy.w > ar.tokens)) {
      throw InvalidArgument("fixed split w must lie in 1..tokens");
    }
    if (policy.theta) policy.theta->validate();
  }
}

DevicePlan plan_device(const SimConfig& cfg, std::size_t device) {
  const ChannelParams& ch = cfg.channels[device % cfg.channels.size()];
  const ModelProfile& profile = cfg.profile;
  DevicePlan plan;
  std::optional<CodecConfig> theta;

  switch (cfg.policy.kind) {
    case PolicyKind::kEcBaseline:
      break;
    case PolicyKind::kFixedSplit:
      plan.ell = cfg.policy.ell;
      plan.w = cfg.ar.enabled ? cfg.policy.w : 1;
      if (plan.ell > 0) theta = cfg.policy.theta.value_or(CodecConfig{});
      break;
    case PolicyKind::kSlicer: {
      Constraints limits = cfg.constraints;
      limits.channel = ch;
      const PlanMode mode = cfg.ar.enabled ? PlanMode::kAr : PlanMode::kSingleShot;
      const std::size_t w_max = cfg.ar.enabled ? std::min(cfg.ar.w_max, cfg.ar.tokens) : 1;
      const SplitPlan sp =
          slicer_search(profile, limits, cfg.time_model, cfg.policy.grids, cfg.policy.base, mode,
                        w_max);
      plan.planned_feasible = sp.feasible;
      plan.ell = sp.ell;
      plan.w = sp.feasible ? sp.w : 1;
      if (sp.feasible) theta = sp.theta;
      break;
    }
  }

  const double zeta = theta ? encode_time_estimate(*theta, cfg.time_model) : 0.0;
  if (plan.ell == 0) {
    plan.ell = 0;
    plan.w = 1;
    plan.bits = profile.input_bits;
  } else {
    plan.bits = payload_bits(cfg, device, profile.layer(plan.ell), *theta);
  }

  if (cfg.ar.enabled) {
    // Steps 1..w run on the device (step w only up to the split); the server
    // finishes step w and runs every remaining step in full.
    plan.front = plan.ell == 0 ? total_latency_single(profile, 0, plan.bits, ch, 0.0)
                               : total_latency_ar(profile, plan.ell, plan.w, plan.bits, ch, zeta);
    plan.server_ms = profile.back_end_ms(plan.ell) +
                     static_cast<double>(cfg.ar.tokens - plan.w) * profile.back_end_ms(0);
  } else {
    plan.front = total_latency_single(profile, plan.ell, plan.bits, ch, zeta);
    plan.server_ms = profile.back_end_ms(plan.ell);
  }
  return plan;
}

SimReport run_simulation(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_devices;

  SimReport report;
  report.policy = cfg.policy.kind;
  report.n_devices = n;
  report.devices.resize(n);
  std::vector<DevicePlan> plans(n);
  for (std::size_t d = 0; d < n; ++d) {
    plans[d] = plan_device(cfg, d);
    report.devices[d].device = d;
    report.devices[d].plan = plans[d];
  }

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::uint64_t seq = 0;
  for (std::size_t d = 0; d < n; ++d) {
    double start = 0.0;
    if (cfg.start_jitter_ms > 0.0) {
      SplitMix64 rng(device_seed(cfg.seed, d));
      start = rng.next_unit() * cfg.start_jitter_ms;
    }
    events.push({start, EventType::kIssue, d, seq++});
  }

  std::vector<std::size_t> issued(n, 0);
  std::vector<double> current_issue(n, 0.0);
  std::vector<std::vector<double>> e2e(n);
  std::vector<std::vector<double>> uplink(n);
  std::deque<Request> waiting;
  bool server_busy = false;
  Request in_service;
  double now = 0.0;
  double last_completion = 0.0;
  std::size_t delivered = 0;

  auto record_queue = [&](double t) {
    report.queue_trace.push_back({t, waiting.size()});
    report.max_queue = std::max(report.max_queue, waiting.size());
  };
  auto start_service = [&](double t) {
    if (server_busy || waiting.empty()) return;
    server_busy = true;
    in_service = waiting.front();
    waiting.pop_front();
    record_queue(t);
    events.push({t + plans[in_service.device].server_ms, EventType::kServiceDone,
                 in_service.device, seq++});
  };

  while (!events.empty()) {
    const Event ev = events.top();
    if (cfg.horizon_ms && ev.time > *cfg.horizon_ms) break;
    events.pop();
    now = ev.time;
    const std::size_t d = ev.device;
    switch (ev.type) {
      case EventType::kIssue:
        ++issued[d];
        ++report.issued;
        current_issue[d] = now;
        events.push({now + plans[d].front.total_ms, EventType::kArrival, d, seq++});
        break;
      case EventType::kArrival:
        ++delivered;
        report.uplink_bits += plans[d].bits;
        uplink[d].push_back(now - current_issue[d]);
        waiting.push_back({d, current_issue[d]});
        record_queue(now);
        start_service(now);
        break;
      case EventType::kServiceDone: {
        const Request done = in_service;
        server_busy = false;
        report.busy_ms += plans[done.device].server_ms;
        ++report.completed;
        ++report.devices[done.device].completed;
        e2e[done.device].push_back(now - done.issued_at);
        last_completion = now;
        if (issued[done.device] < cfg.requests_per_device) {
          events.push({now + cfg.think_time_ms, EventType::kIssue, done.device, seq++});
        }
        start_service(now);
        break;
      }
    }
  }

  report.queued = waiting.size();
  report.in_flight = report.issued - report.completed - report.queued;
  report.makespan_ms = cfg.horizon_ms && !events.empty() ? *cfg.horizon_ms : last_completion;
  report.throughput_per_s = report.makespan_ms > 0.0
                                ? static_cast<double>(report.completed) / (report.makespan_ms / 1000.0)
                                : 0.0;
  report.bits_per_request =
      delivered == 0 ? 0.0 : static_cast<double>(report.uplink_bits) / static_cast<double>(delivered);

  std::vector<double> all;
  for (std::size_t d = 0; d < n; ++d) {
    all.insert(all.end(), e2e[d].begin(), e2e[d].end());
    report.devices[d].e2e_ms = summarize(std::move(e2e[d]));
    report.devices[d].uplink_ms = summarize(std::move(uplink[d]));
  }
  report.e2e_ms = summarize(std::move(all));
  return report;
}

PolicyComparison compare_policies(const SimConfig& base, const SimConfig& alt) {
  const bool same = base.n_devices == alt.n_devices &&
                    base.requests_per_device == alt.requests_per_device &&
                    base.seed == alt.seed && base.think_time_ms == alt.think_time_ms &&
                    base.start_jitter_ms == alt.start_jitter_ms &&
                    base.horizon_ms == alt.horizon_ms && base.ar.enabled == alt.ar.enabled &&
                    base.ar.tokens == alt.ar.tokens;
  if (!same) {
    throw InvalidArgument("compared configurations describe different workloads");
  }
  PolicyComparison cmp;
  cmp.base = run_simulation(base);
  cmp.alt = run_simulation(alt);
  cmp.busy_ratio = ratio(cmp.alt.busy_ms, cmp.base.busy_ms);
  cmp.throughput_ratio = ratio(cmp.alt.throughput_per_s, cmp.base.throughput_per_s);
  cmp.makespan_ratio = ratio(cmp.alt.makespan_ms, cmp.base.makespan_ms);
  cmp.mean_e2e_ratio = ratio(cmp.alt.e2e_ms.mean, cmp.base.e2e_ms.mean);
  cmp.uplink_bits_ratio = ratio(static_cast<double>(cmp.alt.uplink_bits),
                                static_cast<double>(cmp.base.uplink_bits));
  return cmp;
}

std::vector<SweepPoint> scaling_sweep(const SimConfig& cfg, const std::vector<std::size_t>& ns) {
  std::vector<SweepPoint> points;
  points.reserve(ns.size());
  for (std::size_t n : ns) {
    SimConfig c = cfg;
    c.n_devices = n;
    points.push_back({n, run_simulation(c)});
  }
  return points;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_report_csv(const SimReport& report, std::ostream& out) {
  out << "device,ell,w,bits,front_ms,server_ms,completed,e2e_mean_ms,e2e_p50_ms,e2e_p95_ms,"
         "e2e_p99_ms,uplink_mean_ms\n";
  for (const auto& d : report.devices) {
    out << d.device << ',' << d.plan.ell << ',' << d.plan.w << ',' << d.plan.bits << ','
        << fmt(d.plan.front.total_ms) << ',' << fmt(d.plan.server_ms) << ',' << d.completed << ','
        << fmt(d.e2e_ms.mean) << ',' << fmt(d.e2e_ms.p50) << ',' << fmt(d.e2e_ms.p95) << ','
        << fmt(d.e2e_ms.p99) << ',' << fmt(d.uplink_ms.mean) << '\n';
  }
  out << "all,,,," << ",," << report.completed << ',' << fmt(report.e2e_ms.mean) << ','
      << fmt(report.e2e_ms.p50) << ',' << fmt(report.e2e_ms.p95) << ','
      << fmt(report.e2e_ms.p99) << ",\n";
}

void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& out) {
  out << "policy,n_devices,completed,busy_ms,busy_per_request_ms,makespan_ms,throughput_per_s,"
         "uplink_bits,bits_per_request,e2e_mean_ms,e2e_p95_ms,max_queue\n";
  for (const auto& p : points) {
    const SimReport& r = p.report;
    out << to_string(r.policy) << ',' << p.n_devices << ',' << r.completed << ','
        << fmt(r.busy_ms) << ',' << fmt(r.busy_per_request_ms()) << ',' << fmt(r.makespan_ms)
        << ',' << fmt(r.throughput_per_s) << ',' << r.uplink_bits << ','
        << fmt(r.bits_per_request) << ',' << fmt(r.e2e_ms.mean) << ',' << fmt(r.e2e_ms.p95)
        << ',' << r.max_queue << '\n';
  }
}

}  // namespace slicer
