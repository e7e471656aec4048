#include "slicer/config_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "slicer/error.hpp"

namespace slicer {

namespace {

const Json& require(const Json& doc, const char* key) {
  if (!doc.is_object()) throw InvalidArgument(std::string("expected an object holding '") + key + "'");
  auto it = doc.find(key);
  if (it == doc.end()) throw InvalidArgument(std::string("missing key '") + key + "'");
  return *it;
}

template <typename T>
T as(const Json& value, const char* key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(std::string("key '") + key + "' has the wrong type");
  }
}

template <typename T>
T get(const Json& doc, const char* key) {
  return as<T>(require(doc, key), key);
}

template <typename T>
T get_or(const Json& doc, const char* key, T fallback) {
  if (!doc.is_object()) return fallback;
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return fallback;
  return as<T>(*it, key);
}

template <typename T>
std::optional<T> get_opt(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return as<T>(*it, key);
}

const char* mode_name(QuantMode mode) { return mode == QuantMode::kAbq ? "abq" : "fixed"; }

Json latency_to_json(const LatencyBreakdown& l) {
  return Json{{"device_ms", l.device_ms}, {"transmit_ms", l.transmit_ms},
              {"encode_ms", l.encode_ms}, {"comm_ms", l.comm_ms},
              {"total_ms", l.total_ms},   {"retx_factor", l.retx_factor}};
}

Json stats_to_json(const LatencyStats& s) {
  return Json{{"count", s.count}, {"mean", s.mean}, {"p50", s.p50},
              {"p95", s.p95},     {"p99", s.p99},   {"max", s.max}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  try {
    return Json::parse(text.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const Json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

ModelProfile profile_from_json(const Json& doc) {
  ModelProfile p;
  p.name = get_or<std::string>(doc, "name", "");
  p.input_bits = get<std::uint64_t>(doc, "input_bits");
  p.compressed_full_pass_ms = get_opt<double>(doc, "compressed_full_pass_ms");
  const Json& layers = require(doc, "layers");
  if (!layers.is_array()) throw InvalidArgument("'layers' must be an array");
  for (const Json& l : layers) {
    LayerProfile layer;
    layer.name = get_or<std::string>(l, "name", "");
    layer.memory_bytes = get<double>(l, "memory_bytes");
    layer.device_ms = get<double>(l, "device_ms");
    layer.compressed_device_ms = get_opt<double>(l, "compressed_device_ms");
    layer.server_ms = get<double>(l, "server_ms");
    layer.if_rows = get<std::uint32_t>(l, "if_rows");
    layer.if_cols = get<std::uint32_t>(l, "if_cols");
    p.layers.push_back(std::move(layer));
  }
  if (auto it = doc.find("perf_table"); it != doc.end()) {
    for (const Json& e : *it) {
      p.perf_table.push_back({get<double>(e, "param"), get<double>(e, "score"),
                              get<double>(e, "compressed_memory_bytes")});
    }
  }
  p.validate();
  return p;
}

Json profile_to_json(const ModelProfile& p) {
  Json doc{{"name", p.name}, {"input_bits", p.input_bits}};
  if (p.compressed_full_pass_ms) doc["compressed_full_pass_ms"] = *p.compressed_full_pass_ms;
  Json layers = Json::array();
  for (const auto& l : p.layers) {
    Json j{{"name", l.name},           {"memory_bytes", l.memory_bytes},
           {"device_ms", l.device_ms}, {"server_ms", l.server_ms},
           {"if_rows", l.if_rows},     {"if_cols", l.if_cols}};
    if (l.compressed_device_ms) j["compressed_device_ms"] = *l.compressed_device_ms;
    layers.push_back(std::move(j));
  }
  doc["layers"] = std::move(layers);
  if (!p.perf_table.empty()) {
    Json table = Json::array();
    for (const auto& e : p.perf_table) {
      table.push_back({{"param", e.param},
                       {"score", e.score},
                       {"compressed_memory_bytes", e.compressed_memory_bytes}});
    }
    doc["perf_table"] = std::move(table);
  }
  return doc;
}

ModelProfile load_profile(const std::filesystem::path& path) {
  return profile_from_json(read_json(path));
}

ChannelParams channel_from_json(const Json& doc) {
  ChannelParams ch;
  ch.rate_bps = get_or(doc, "rate_bps", ch.rate_bps);
  ch.bandwidth_hz = get_or(doc, "bandwidth_hz", ch.bandwidth_hz);
  ch.snr = get_or(doc, "snr", ch.snr);
  ch.epsilon = get_or(doc, "epsilon", ch.epsilon);
  ch.fading_variance = get_or(doc, "fading_variance", ch.fading_variance);
  ch.validate();
  return ch;
}

Json channel_to_json(const ChannelParams& ch) {
  return Json{{"rate_bps", ch.rate_bps}, {"bandwidth_hz", ch.bandwidth_hz}, {"snr", ch.snr},
              {"epsilon", ch.epsilon},   {"fading_variance", ch.fading_variance}};
}

Constraints constraints_from_json(const Json& doc) {
  Constraints c;
  c.latency_budget_ms = get_or(doc, "latency_budget_ms", kUnbounded);
  c.memory_budget_bytes = get_or(doc, "memory_budget_bytes", kUnbounded);
  c.ar_offload_cap_bits = get_or(doc, "ar_offload_cap_bits", kUnbounded);
  c.buffer_budget_bytes = get_or(doc, "buffer_budget_bytes", kUnbounded);
  for (double v : {c.latency_budget_ms, c.memory_budget_bytes, c.ar_offload_cap_bits,
                   c.buffer_budget_bytes}) {
    if (!(v > 0.0)) throw InvalidArgument("constraint budgets must be positive");
  }
  if (auto it = doc.find("channel"); it != doc.end()) c.channel = channel_from_json(*it);
  return c;
}

DeviceTimeModel time_model_from_json(const Json& doc) {
  DeviceTimeModel m;
  auto check = [](double ms) {
    if (!(ms >= 0.0)) throw InvalidArgument("time model entries must be non-negative");
    return ms;
  };
  for (const Json& e : require(doc, "atkf")) {
    m.atkf.push_back({get<double>(e, "sparsity"), get_or(e, "lambda", 0.0), check(get<double>(e, "ms"))});
  }
  for (const Json& e : require(doc, "split")) {
    m.split.push_back({get<std::size_t>(e, "blocks_plus"), get<std::size_t>(e, "blocks_minus"),
                       check(get<double>(e, "ms"))});
  }
  for (const Json& e : require(doc, "quant")) {
    m.quant.push_back({get<int>(e, "bits"), check(get<double>(e, "ms"))});
  }
  if (m.atkf.empty() || m.split.empty() || m.quant.empty()) {
    throw InvalidArgument("time model tables must be non-empty");
  }
  m.buffer_bytes = get_opt<double>(doc, "buffer_bytes");
  return m;
}

CodecConfig codec_from_json(const Json& doc, const CodecConfig& defaults) {
  CodecConfig c = defaults;
  c.sparsity = get_or(doc, "sparsity", c.sparsity);
  c.lambda = get_or(doc, "lambda", c.lambda);
  c.blocks_plus = get_or(doc, "blocks_plus", c.blocks_plus);
  c.blocks_minus = get_or(doc, "blocks_minus", c.blocks_minus);
  c.q_bit = get_or(doc, "q_bit", c.q_bit);
  c.delta = get_or(doc, "delta", c.delta);
  const std::string mode = get_or<std::string>(doc, "mode", mode_name(c.mode));
  if (mode == "abq") {
    c.mode = QuantMode::kAbq;
  } else if (mode == "fixed") {
    c.mode = QuantMode::kFixed;
  } else {
    throw InvalidArgument("codec mode must be 'abq' or 'fixed'");
  }
  c.fixed_q = get_or(doc, "fixed_q", c.fixed_q);
  c.validate();
  return c;
}

Json codec_to_json(const CodecConfig& c) {
  Json doc{{"sparsity", c.sparsity},       {"lambda", c.lambda},
           {"blocks_plus", c.blocks_plus}, {"blocks_minus", c.blocks_minus},
           {"q_bit", c.q_bit},             {"delta", c.delta},
           {"mode", mode_name(c.mode)}};
  if (c.mode == QuantMode::kFixed) doc["fixed_q"] = c.fixed_q;
  return doc;
}

SearchGrids grids_from_json(const Json& doc) {
  SearchGrids g;
  g.block_grid = get_or(doc, "blocks", g.block_grid);
  g.sparsity_grid = get_or(doc, "sparsity", g.sparsity_grid);
  if (g.block_grid.empty() || g.sparsity_grid.empty()) {
    throw InvalidArgument("search grids must be non-empty");
  }
  for (std::size_t m : g.block_grid) {
    if (m == 0) throw InvalidArgument("block grid entries must be positive");
  }
  for (double s : g.sparsity_grid) {
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("sparsity grid entries must lie in [0, 1]");
  }
  return g;
}

SimConfig sim_config_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  SimConfig cfg;
  cfg.n_devices = get_or<std::size_t>(doc, "n_devices", 1);
  cfg.requests_per_device = get_or<std::size_t>(doc, "requests_per_device", 1);
  cfg.seed = get_or<std::uint64_t>(doc, "seed", 0);
  cfg.think_time_ms = get_or(doc, "think_time_ms", 0.0);
  cfg.start_jitter_ms = get_or(doc, "start_jitter_ms", 0.0);
  cfg.horizon_ms = get_opt<double>(doc, "horizon_ms");

  const Json& profile = require(doc, "profile");
  cfg.profile = profile.is_string()
                    ? load_profile(resolve(base_dir, profile.get<std::string>()))
                    : profile_from_json(profile);

  if (auto it = doc.find("channels"); it != doc.end()) {
    cfg.channels.clear();
    for (const Json& ch : *it) cfg.channels.push_back(channel_from_json(ch));
  }
  if (auto it = doc.find("constraints"); it != doc.end()) cfg.constraints = constraints_from_json(*it);
  if (auto it = doc.find("time_model"); it != doc.end()) {
    cfg.time_model = it->is_string()
                         ? time_model_from_json(read_json(resolve(base_dir, it->get<std::string>())))
                         : time_model_from_json(*it);
  }

  const std::string payload = get_or<std::string>(doc, "payload", "bound");
  if (payload == "bound") {
    cfg.payload = PayloadMode::kBound;
  } else if (payload == "encoded") {
    cfg.payload = PayloadMode::kEncoded;
  } else {
    throw InvalidArgument("payload must be 'bound' or 'encoded'");
  }

  if (auto it = doc.find("ar"); it != doc.end()) {
    cfg.ar.enabled = get_or(*it, "enabled", true);
    cfg.ar.tokens = get_or<std::size_t>(*it, "tokens", 1);
    cfg.ar.w_max = get_or<std::size_t>(*it, "w_max", 1);
  }

  const Json& policy = require(doc, "policy");
  const std::string kind = get<std::string>(policy, "kind");
  if (kind == "ec_baseline") {
    cfg.policy.kind = PolicyKind::kEcBaseline;
  } else if (kind == "fixed_split") {
    cfg.policy.kind = PolicyKind::kFixedSplit;
    cfg.policy.ell = get<std::size_t>(policy, "ell");
    cfg.policy.w = get_or<std::size_t>(policy, "w", 1);
    if (auto it = policy.find("theta"); it != policy.end()) cfg.policy.theta = codec_from_json(*it);
  } else if (kind == "slicer") {
    cfg.policy.kind = PolicyKind::kSlicer;
    if (auto it = policy.find("grids"); it != policy.end()) cfg.policy.grids = grids_from_json(*it);
    if (auto it = policy.find("base"); it != policy.end()) cfg.policy.base = codec_from_json(*it);
  } else {
    throw InvalidArgument("policy kind must be ec_baseline, fixed_split or slicer");
  }
  cfg.validate();
  return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return sim_config_from_json(read_json(path), path.parent_path());
}

Json plan_to_json(const SplitPlan& plan) {
  Json doc{{"mode", to_string(plan.mode)},
           {"feasible", plan.feasible},
           {"ell_star", plan.ell}};
  if (plan.mode == PlanMode::kAr) doc["w_star"] = plan.w;
  doc["theta"] = codec_to_json(plan.theta);
  doc["predicted_bits"] = plan.predicted_bits;
  doc["predicted_latency"] = latency_to_json(plan.predicted_latency);
  Json trace = Json::array();
  for (const auto& t : plan.trace) {
    trace.push_back({{"ell", t.ell},
                     {"w", t.w},
                     {"sparsity", t.sparsity},
                     {"blocks_plus", t.blocks_plus},
                     {"blocks_minus", t.blocks_minus},
                     {"bound_bits", t.bound_bits},
                     {"latency_ms", t.latency_ms},
                     {"verdict", to_string(t.verdict)}});
  }
  doc["search_trace"] = std::move(trace);
  return doc;
}

Json sim_report_to_json(const SimReport& r) {
  Json devices = Json::array();
  for (const auto& d : r.devices) {
    devices.push_back({{"device", d.device},
                       {"ell", d.plan.ell},
                       {"w", d.plan.w},
                       {"planned_feasible", d.plan.planned_feasible},
                       {"bits", d.plan.bits},
                       {"front", latency_to_json(d.plan.front)},
                       {"server_ms", d.plan.server_ms},
                       {"completed", d.completed},
                       {"e2e_ms", stats_to_json(d.e2e_ms)},
                       {"uplink_ms", stats_to_json(d.uplink_ms)}});
  }
  return Json{{"policy", to_string(r.policy)},
              {"n_devices", r.n_devices},
              {"issued", r.issued},
              {"completed", r.completed},
              {"in_flight", r.in_flight},
              {"queued", r.queued},
              {"busy_ms", r.busy_ms},
              {"busy_per_request_ms", r.busy_per_request_ms()},
              {"makespan_ms", r.makespan_ms},
              {"throughput_per_s", r.throughput_per_s},
              {"uplink_bits", r.uplink_bits},
              {"bits_per_request", r.bits_per_request},
              {"max_queue", r.max_queue},
              {"e2e_ms", stats_to_json(r.e2e_ms)},
              {"devices", std::move(devices)}};
}

Json comparison_to_json(const PolicyComparison& cmp) {
  return Json{{"base", sim_report_to_json(cmp.base)},
              {"alt", sim_report_to_json(cmp.alt)},
              {"ratios",
               {{"busy", cmp.busy_ratio},
                {"throughput", cmp.throughput_ratio},
                {"makespan", cmp.makespan_ratio},
                {"mean_e2e", cmp.mean_e2e_ratio},
                {"uplink_bits", cmp.uplink_bits_ratio}}}};
}

}  // namespace slicer
