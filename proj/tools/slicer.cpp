// slicer: command-line front end for the codec, planner and simulator.
//
// Exit status: 0 success, 1 unexpected failure, 2 usage, 3 I/O,
// 4 malformed or corrupt data, 5 infeasible plan, 6 invalid argument or
// configuration.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slicer/abq.hpp"
#include "slicer/atkf.hpp"
#include "slicer/codec.hpp"
#include "slicer/config_io.hpp"
#include "slicer/error.hpp"
#include "slicer/planner.hpp"
#include "slicer/sim.hpp"
#include "slicer/tensor.hpp"

namespace {

using namespace slicer;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitData = 4;
constexpr int kExitInfeasible = 5;
constexpr int kExitInvalid = 6;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kFormat:
    case ErrorCode::kTruncated:
    case ErrorCode::kChecksum:
    case ErrorCode::kCorruptData:
    case ErrorCode::kNonFinite:
    case ErrorCode::kShape:
      return kExitData;
    case ErrorCode::kInvalidArgument:
      return kExitInvalid;
  }
  return kExitOther;
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("cannot parse ") + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw InvalidArgument(std::string(what) + " list is empty");
  return out;
}

// Codec flags shared by encode, plan and plan-ar.
struct CodecFlags {
  double sparsity = 0.9;
  double lambda = 0.0;
  std::string blocks = "1,1";
  int q_bit = 8;
  double delta = 0.01;
  std::string fixed_q;
  std::string theta_file;

  void attach(CLI::App* cmd, bool allow_file) {
    cmd->add_option("--sparsity", sparsity, "Target sparsity s in [0, 1]")->capture_default_str();
    cmd->add_option("--lambda", lambda, "Threshold asymmetry in [0, 1)")->capture_default_str();
    cmd->add_option("--blocks", blocks, "Block counts M+,M-")->capture_default_str();
    cmd->add_option("--qbit", q_bit, "Maximum code width")->capture_default_str();
    auto* d = cmd->add_option("--delta", delta, "ABQ distortion budget")->capture_default_str();
    auto* f = cmd->add_option("--fixed-q", fixed_q, "Fixed widths q1,q2,... (disables ABQ)");
    d->excludes(f);
    if (allow_file) {
      cmd->add_option("--theta", theta_file, "Codec configuration JSON (overrides flags)");
    }
  }

  CodecConfig build() const {
    if (!theta_file.empty()) return codec_from_json(read_json(theta_file));
    CodecConfig c;
    c.sparsity = sparsity;
    c.lambda = lambda;
    const auto m = parse_size_list(blocks, "--blocks");
    if (m.size() != 2) throw InvalidArgument("--blocks expects M+,M-");
    c.blocks_plus = m[0];
    c.blocks_minus = m[1];
    c.q_bit = q_bit;
    c.delta = delta;
    if (!fixed_q.empty()) {
      c.mode = QuantMode::kFixed;
      for (std::size_t q : parse_size_list(fixed_q, "--fixed-q")) {
        c.fixed_q.push_back(static_cast<int>(q));
      }
    }
    c.validate();
    return c;
  }
};

// Inputs shared by plan, plan-ar and search.
struct PlanInputs {
  std::string profile;
  std::string constraints;
  std::string channel;
  std::string time_model;
  std::string out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--profile", profile, "Model profile JSON")->required();
    cmd->add_option("--constraints", constraints, "Constraints JSON")->required();
    cmd->add_option("--channel", channel, "Channel JSON (overrides the constraints' channel)");
    cmd->add_option("--time-model", time_model, "Device time model JSON (default: zero cost)");
    cmd->add_option("--out", out, "Write the plan report JSON here");
  }

  ModelProfile load_profile_file() const { return load_profile(profile); }

  Constraints load_constraints() const {
    Constraints c = constraints_from_json(read_json(constraints));
    if (!channel.empty()) c.channel = channel_from_json(read_json(channel));
    return c;
  }

  DeviceTimeModel load_time_model() const {
    return time_model.empty() ? DeviceTimeModel::zero()
                              : time_model_from_json(read_json(time_model));
  }
};

void print_plan(const SplitPlan& plan, bool json) {
  if (json) {
    std::cout << plan_to_json(plan).dump(2) << '\n';
    return;
  }
  std::cout << "mode: " << to_string(plan.mode) << '\n';
  std::cout << "feasible: " << (plan.feasible ? "yes" : "no") << '\n';
  std::cout << "split: " << plan.ell << (plan.ell == 0 ? " (raw-input offload)" : "") << '\n';
  if (plan.mode == PlanMode::kAr) std::cout << "steps on device: " << plan.w << '\n';
  if (plan.feasible) {
    const CodecConfig& t = plan.theta;
    std::cout << "theta: s=" << fmt(t.sparsity, 4) << " lambda=" << fmt(t.lambda, 4)
              << " blocks=" << t.blocks_plus << ',' << t.blocks_minus << " q_bit=" << t.q_bit
              << " delta=" << fmt(t.delta, 4) << '\n';
  }
  const LatencyBreakdown& l = plan.predicted_latency;
  std::cout << "payload bound: " << plan.predicted_bits << " bits\n";
  std::cout << "latency: device " << fmt(l.device_ms, 3) << " ms + encode " << fmt(l.encode_ms, 3)
            << " ms + transmit " << fmt(l.transmit_ms, 3) << " ms (x" << l.retx_factor
            << ") = " << fmt(l.total_ms, 3) << " ms\n";
  std::cout << "candidates evaluated: " << plan.trace.size() << '\n';
}

int finish_plan(const SplitPlan& plan, const PlanInputs& in, bool json) {
  if (!in.out.empty()) write_json(plan_to_json(plan), in.out);
  print_plan(plan, json);
  return plan.feasible ? kExitOk : kExitInfeasible;
}

int cmd_gen(std::size_t rows, std::size_t cols, std::uint64_t seed, const std::string& dist,
            const std::string& out) {
  const Distribution d = dist == "uniform" ? Distribution::kUniform : Distribution::kGaussian;
  save_tensor(random_tensor(rows, cols, seed, d), out);
  std::cout << "wrote " << rows << 'x' << cols << ' ' << dist << " tensor (seed " << seed
            << ") to " << out << '\n';
  return kExitOk;
}

void print_blocks(const CompressedIF& c) {
  std::cout << "block  sign   nnz  bits  scale          v_min\n";
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    const EncodedBlock& b = c.blocks[i];
    char line[128];
    std::snprintf(line, sizeof line, "%5zu  %-5s %5zu  %4u  %-13.6g  %-.6g\n", i,
                  to_string(b.sign), b.nnz(), static_cast<unsigned>(b.bits),
                  static_cast<double>(b.scale), static_cast<double>(b.v_min));
    std::cout << line;
  }
}

Json blocks_json(const CompressedIF& c) {
  Json blocks = Json::array();
  for (const auto& b : c.blocks) {
    blocks.push_back({{"sign", to_string(b.sign)},
                      {"nnz", b.nnz()},
                      {"bits", b.bits},
                      {"scale", b.scale},
                      {"v_min", b.v_min}});
  }
  return blocks;
}

int cmd_encode(const std::string& in, const std::string& out, const CodecFlags& flags,
               std::uint64_t seed, bool json) {
  const CodecConfig cfg = flags.build();
  const DenseTensor x = load_tensor(in);
  const CompressedIF c = encode(x, cfg, seed);
  save_compressed(c, out);
  const double per_element = static_cast<double>(c.payload_bits) / static_cast<double>(x.size());
  if (json) {
    Json doc{{"payload_bits", c.payload_bits},
             {"bits_per_element", per_element},
             {"nnz", c.nnz()},
             {"blocks", blocks_json(c)}};
    std::cout << doc.dump(2) << '\n';
    return kExitOk;
  }
  std::cout << "payload bits: " << c.payload_bits << '\n';
  std::cout << "bits/element: " << fmt(per_element, 4) << '\n';
  std::cout << "retained: " << c.nnz() << " of " << x.size() << '\n';
  std::cout << "block widths:";
  for (const auto& b : c.blocks) std::cout << ' ' << static_cast<unsigned>(b.bits);
  std::cout << '\n';
  return kExitOk;
}

int cmd_decode(const std::string& in, const std::string& out, const std::string& ref, bool json) {
  const CompressedIF c = load_compressed(in);
  const DenseTensor y = decode(c);
  save_tensor(y, out);
  Json doc{{"rows", y.rows()}, {"cols", y.cols()}};
  if (!ref.empty()) {
    const DenseTensor x = load_tensor(ref);
    if (x.rows() != y.rows() || x.cols() != y.cols()) {
      throw ShapeError("reference shape differs from the decoded tensor");
    }
    std::vector<bool> retained(y.size(), false);
    double half_step = 0.0;
    for (const auto& b : c.blocks) {
      half_step = std::max(half_step, static_cast<double>(b.scale) / 2.0);
      for (std::uint32_t r = 0; r < c.rows; ++r) {
        for (std::uint32_t k = b.row_ptr[r]; k < b.row_ptr[r + 1]; ++k) {
          retained[static_cast<std::size_t>(r) * c.cols + b.cols[k]] = true;
        }
      }
    }
    double max_err = 0.0;
    double sum_err = 0.0;
    double max_retained = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double e = std::abs(static_cast<double>(y[i]) - static_cast<double>(x[i]));
      max_err = std::max(max_err, e);
      sum_err += e;
      if (retained[i]) max_retained = std::max(max_retained, e);
    }
    doc["max_abs_error"] = max_err;
    doc["mean_abs_error"] = sum_err / static_cast<double>(y.size());
    doc["max_retained_error"] = max_retained;
    doc["half_step_bound"] = half_step;
  }
  if (json) {
    std::cout << doc.dump(2) << '\n';
    return kExitOk;
  }
  std::cout << "wrote " << y.rows() << 'x' << y.cols() << " reconstruction to " << out << '\n';
  if (!ref.empty()) {
    std::cout << "max abs error: " << fmt(doc["max_abs_error"].get<double>(), 8) << '\n';
    std::cout << "mean abs error: " << fmt(doc["mean_abs_error"].get<double>(), 8) << '\n';
    std::cout << "max error on retained entries: "
              << fmt(doc["max_retained_error"].get<double>(), 8) << " (bound o/2 = "
              << fmt(doc["half_step_bound"].get<double>(), 8) << ")\n";
  }
  return kExitOk;
}

int cmd_stats(const std::string& in, bool json) {
  const CompressedIF c = load_compressed(in);
  const std::size_t total = static_cast<std::size_t>(c.rows) * c.cols;
  CodecConfig theta;
  theta.sparsity = static_cast<double>(c.sparsity);
  theta.lambda = static_cast<double>(c.lambda);
  theta.blocks_plus = c.blocks_plus;
  theta.blocks_minus = c.blocks_minus;
  theta.q_bit = c.q_bit;
  theta.delta = static_cast<double>(c.delta);
  theta.mode = c.mode;
  theta.fixed_q.assign(c.fixed_q.begin(), c.fixed_q.end());
  const std::uint64_t entries = std::max<std::uint64_t>(keep_count(theta.sparsity, total), c.nnz());
  const PayloadBound bound = payload_bound_for_entries(c.rows, c.cols, theta, entries);
  const std::uint64_t exact = payload_bits_exact(c);
  const double measured = 1.0 - static_cast<double>(c.nnz()) / static_cast<double>(total);
  if (json) {
    Json doc{{"rows", c.rows},
             {"cols", c.cols},
             {"target_sparsity", c.sparsity},
             {"measured_sparsity", measured},
             {"nnz", c.nnz()},
             {"exact_bits", exact},
             {"bound_bits", bound.total()},
             {"bits_per_element", static_cast<double>(exact) / static_cast<double>(total)},
             {"blocks", blocks_json(c)}};
    std::cout << doc.dump(2) << '\n';
    return kExitOk;
  }
  std::cout << "shape: " << c.rows << 'x' << c.cols << '\n';
  std::cout << "sparsity: target " << fmt(c.sparsity, 4) << ", measured " << fmt(measured, 4)
            << " (" << c.nnz() << " retained)\n";
  std::cout << "payload bits: exact " << exact << ", bound " << bound.total() << '\n';
  std::cout << "bits/element: "
            << fmt(static_cast<double>(exact) / static_cast<double>(total), 4) << '\n';
  print_blocks(c);
  return kExitOk;
}

void print_report(const SimReport& r) {
  std::cout << "policy " << to_string(r.policy) << ", " << r.n_devices << " device(s)\n";
  std::cout << "  completed " << r.completed << " of " << r.issued << " issued (" << r.in_flight
            << " in flight, " << r.queued << " queued)\n";
  std::cout << "  dev0 busy " << fmt(r.busy_ms, 3) << " ms (" << fmt(r.busy_per_request_ms(), 3)
            << " ms/request), makespan " << fmt(r.makespan_ms, 3) << " ms\n";
  std::cout << "  throughput " << fmt(r.throughput_per_s, 3) << " req/s, uplink " << r.uplink_bits
            << " bits (" << fmt(r.bits_per_request, 1) << " per request)\n";
  std::cout << "  e2e mean " << fmt(r.e2e_ms.mean, 3) << " ms, p95 " << fmt(r.e2e_ms.p95, 3)
            << " ms, p99 " << fmt(r.e2e_ms.p99, 3) << " ms, max queue " << r.max_queue << '\n';
}

int cmd_simulate(const std::string& config, const std::string& compare, const std::string& sweep,
                 const std::string& csv, const std::string& summary, bool json) {
  const SimConfig cfg = load_sim_config(config);
  std::optional<SimConfig> alt;
  if (!compare.empty()) alt = load_sim_config(compare);

  auto open_csv = [&]() {
    std::ofstream out(csv);
    if (!out) throw IoError("cannot write " + csv);
    return out;
  };

  if (!sweep.empty()) {
    const auto ns = parse_size_list(sweep, "--sweep");
    std::vector<SweepPoint> points = scaling_sweep(cfg, ns);
    if (alt) {
      auto more = scaling_sweep(*alt, ns);
      points.insert(points.end(), more.begin(), more.end());
    }
    if (!csv.empty()) {
      auto out = open_csv();
      write_sweep_csv(points, out);
    }
    Json doc = Json::array();
    for (const auto& p : points) doc.push_back(sim_report_to_json(p.report));
    if (!summary.empty()) write_json(doc, summary);
    if (json) {
      std::cout << doc.dump(2) << '\n';
    } else {
      write_sweep_csv(points, std::cout);
    }
    return kExitOk;
  }

  if (alt) {
    const PolicyComparison cmp = compare_policies(cfg, *alt);
    if (!csv.empty()) {
      auto out = open_csv();
      write_sweep_csv({{cfg.n_devices, cmp.base}, {alt->n_devices, cmp.alt}}, out);
    }
    const Json doc = comparison_to_json(cmp);
    if (!summary.empty()) write_json(doc, summary);
    if (json) {
      std::cout << doc.dump(2) << '\n';
      return kExitOk;
    }
    print_report(cmp.base);
    print_report(cmp.alt);
    std::cout << "ratios (alt/base): busy " << fmt(cmp.busy_ratio, 4) << ", throughput "
              << fmt(cmp.throughput_ratio, 4) << ", makespan " << fmt(cmp.makespan_ratio, 4)
              << ", mean e2e " << fmt(cmp.mean_e2e_ratio, 4) << ", uplink bits "
              << fmt(cmp.uplink_bits_ratio, 4) << '\n';
    return kExitOk;
  }

  const SimReport report = run_simulation(cfg);
  if (!csv.empty()) {
    auto out = open_csv();
    write_report_csv(report, out);
  }
  const Json doc = sim_report_to_json(report);
  if (!summary.empty()) write_json(doc, summary);
  if (json) {
    std::cout << doc.dump(2) << '\n';
  } else {
    print_report(report);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLICER split-computing toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json = false;
  app.add_flag("--json", json, "Machine-readable output");

  // gen
  auto* gen = app.add_subcommand("gen", "Write a seeded random tensor");
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;
  std::string dist = "gaussian";
  std::string gen_out;
  gen->add_option("--rows", rows)->required()->check(CLI::PositiveNumber);
  gen->add_option("--cols", cols)->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--dist", dist)->check(CLI::IsMember({"uniform", "gaussian"}))->capture_default_str();
  gen->add_option("--out", gen_out)->required();

  // encode
  auto* enc = app.add_subcommand("encode", "Compress a .tns tensor into a .sif payload");
  std::string enc_in;
  std::string enc_out;
  std::uint64_t enc_seed = 0;
  CodecFlags enc_flags;
  enc->add_option("--in", enc_in)->required();
  enc->add_option("--out", enc_out)->required();
  enc->add_option("--seed", enc_seed, "ATKF tie-break seed")->capture_default_str();
  enc_flags.attach(enc, false);

  // decode
  auto* dec = app.add_subcommand("decode", "Reconstruct a .tns tensor from a .sif payload");
  std::string dec_in;
  std::string dec_out;
  std::string dec_ref;
  dec->add_option("--in", dec_in)->required();
  dec->add_option("--out", dec_out)->required();
  dec->add_option("--ref", dec_ref, "Original tensor for error reporting");

  // stats
  auto* stats = app.add_subcommand("stats", "Summarise a .sif payload");
  std::string stats_in;
  stats->add_option("--in", stats_in)->required();

  // plan / plan-ar
  auto* plan = app.add_subcommand("plan", "Deepest feasible single-shot split");
  PlanInputs plan_in;
  CodecFlags plan_flags;
  plan_in.attach(plan);
  plan_flags.attach(plan, true);

  auto* plan_ar = app.add_subcommand("plan-ar", "Deepest feasible autoregressive (split, steps)");
  PlanInputs ar_in;
  CodecFlags ar_flags;
  std::size_t ar_w_max = 1;
  ar_in.attach(plan_ar);
  ar_flags.attach(plan_ar, true);
  plan_ar->add_option("--w-max", ar_w_max, "Largest step count on the device")
      ->required()
      ->check(CLI::PositiveNumber);

  // search
  auto* search = app.add_subcommand("search", "Hierarchical search over blocks, sparsity, split");
  PlanInputs search_in;
  std::string grids_file;
  bool search_ar = false;
  std::size_t search_w_max = 1;
  double search_lambda = 0.0;
  int search_qbit = 8;
  double search_delta = 0.01;
  search_in.attach(search);
  search->add_option("--grids", grids_file, "Grid JSON with 'blocks' and 'sparsity' arrays");
  search->add_flag("--ar", search_ar, "Search over (split, steps) instead of splits");
  search->add_option("--w-max", search_w_max)->check(CLI::PositiveNumber)->capture_default_str();
  search->add_option("--lambda", search_lambda)->capture_default_str();
  search->add_option("--qbit", search_qbit)->capture_default_str();
  search->add_option("--delta", search_delta)->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the multi-device simulator");
  std::string sim_cfg;
  std::string sim_compare;
  std::string sim_sweep;
  std::string sim_csv;
  std::string sim_summary;
  sim->add_option("--config", sim_cfg, "Simulation config JSON")->required();
  sim->add_option("--compare", sim_compare, "Second config to compare against");
  sim->add_option("--sweep", sim_sweep, "Device counts, e.g. 1,2,4,8,16");
  sim->add_option("--csv", sim_csv, "CSV output path");
  sim->add_option("--summary", sim_summary, "JSON summary output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(rows, cols, seed, dist, gen_out);
    if (*enc) return cmd_encode(enc_in, enc_out, enc_flags, enc_seed, json);
    if (*dec) return cmd_decode(dec_in, dec_out, dec_ref, json);
    if (*stats) return cmd_stats(stats_in, json);
    if (*plan) {
      const SplitPlan p = select_split_single(plan_in.load_profile_file(), plan_in.load_constraints(),
                                              plan_flags.build(), plan_in.load_time_model());
      return finish_plan(p, plan_in, json);
    }
    if (*plan_ar) {
      const SplitPlan p = select_split_ar(ar_in.load_profile_file(), ar_in.load_constraints(),
                                          ar_flags.build(), ar_in.load_time_model(), ar_w_max);
      return finish_plan(p, ar_in, json);
    }
    if (*search) {
      CodecConfig base;
      base.lambda = search_lambda;
      base.q_bit = search_qbit;
      base.delta = search_delta;
      base.validate();
      const SearchGrids grids = grids_file.empty() ? SearchGrids{} : grids_from_json(read_json(grids_file));
      const SplitPlan p =
          slicer_search(search_in.load_profile_file(), search_in.load_constraints(),
                        search_in.load_time_model(), grids, base,
                        search_ar ? PlanMode::kAr : PlanMode::kSingleShot, search_w_max);
      return finish_plan(p, search_in, json);
    }
    if (*sim) return cmd_simulate(sim_cfg, sim_compare, sim_sweep, sim_csv, sim_summary, json);
  } catch (const Error& e) {
    std::cerr << "slicer: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "slicer: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitUsage;
}
