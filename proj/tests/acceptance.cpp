// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "planner_oracle.hpp"
#include "slicer/abq.hpp"
#include "slicer/atkf.hpp"
#include "slicer/channel.hpp"
#include "slicer/codec.hpp"
#include "slicer/config_io.hpp"
#include "slicer/planner.hpp"
#include "slicer/sim.hpp"
#include "slicer/tensor.hpp"

using namespace slicer;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SLICER_DATA_DIR;
const std::string kCli = SLICER_CLI_PATH;

/// Thrown by check() with a description of the first failing case.
struct Failure {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string str(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

CodecConfig random_theta(SplitMix64& rng) {
  CodecConfig t;
  t.sparsity = 0.05 * static_cast<double>(rng.next() % 21);
  t.lambda = rng.next() % 3 == 0 ? 0.0 : 0.9 * rng.next_unit();
  t.blocks_plus = 1 + rng.next() % 4;
  t.blocks_minus = 1 + rng.next() % 4;
  t.q_bit = 1 + static_cast<int>(rng.next() % 16);
  t.delta = rng.next_unit() * 2.0;
  if (rng.next() % 4 == 0) {
    t.mode = QuantMode::kFixed;
    t.blocks_minus = t.blocks_plus;
    t.fixed_q.clear();
    for (std::size_t m = 0; m < t.blocks_plus; ++m) {
      t.fixed_q.push_back(1 + static_cast<int>(rng.next() % 16));
    }
  }
  return t;
}

DenseTensor random_input(SplitMix64& rng, std::size_t max_rows, std::size_t max_cols) {
  const std::size_t rows = 1 + rng.next() % max_rows;
  const std::size_t cols = 1 + rng.next() % max_cols;
  const auto dist = rng.next() % 2 == 0 ? Distribution::kGaussian : Distribution::kUniform;
  return random_tensor(rows, cols, rng.next(), dist);
}

void exact_sparsity() {
  SplitMix64 rng(1001);
  for (int trial = 0; trial < 1000; ++trial) {
    const DenseTensor x = random_input(rng, 256, 256);
    const double s = 0.05 * static_cast<double>(1 + trial % 19);
    const double lambda = trial % 2 == 0 ? 0.0 : 0.5 * rng.next_unit();
    const AtkfResult r = atkf_filter(x, s, lambda, rng.next());
    // Independent floor((1-s)T) in exact rational arithmetic on the grid s = j/20.
    const std::size_t j = static_cast<std::size_t>(1 + trial % 19);
    const std::size_t expect = (20 - j) * x.size() / 20;
    check(r.kept_indices.size() == expect,
          "trial " + std::to_string(trial) + ": kept " + std::to_string(r.kept_indices.size()) +
              ", expected " + std::to_string(expect));
    std::size_t nonzero = 0;
    for (float v : r.filtered.values()) nonzero += v != 0.0f;
    std::size_t zero_kept = 0;
    for (std::size_t i : r.kept_indices) zero_kept += x[i] == 0.0f;
    check(nonzero + zero_kept == expect, "filtered support disagrees with kept set");
  }
}

void codec_round_trip() {
  SplitMix64 rng(2002);
  for (int trial = 0; trial < 1000; ++trial) {
    const DenseTensor x = random_input(rng, 48, 300);
    const CodecConfig cfg = random_theta(rng);
    const std::uint64_t seed = rng.next();
    const CompressedIF c = encode(x, cfg, seed);
    const DenseTensor y = decode(c);
    const AtkfResult r = atkf_filter(x, cfg.sparsity, cfg.lambda, seed);

    std::vector<float> half_step(x.size(), -1.0f);
    for (const auto& b : c.blocks) {
      for (std::uint32_t row = 0; row < c.rows; ++row) {
        for (std::uint32_t k = b.row_ptr[row]; k < b.row_ptr[row + 1]; ++k) {
          half_step[row * c.cols + b.cols[k]] = b.scale / 2.0f;
        }
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (r.filtered[i] == 0.0f) {
        check(y[i] == 0.0f, "trial " + std::to_string(trial) + ": zero position decoded to " +
                                str(y[i]));
        continue;
      }
      check(half_step[i] >= 0.0f, "retained position missing from every block");
      const float ax = std::abs(x[i]);
      const float ulp4 = 4.0f * (std::nextafter(ax, INFINITY) - ax);
      const float err = std::abs(y[i] - x[i]);
      check(err <= half_step[i] + ulp4, "trial " + std::to_string(trial) + ": error " + str(err) +
                                            " exceeds " + str(half_step[i] + ulp4));
    }
  }
}

void serialization_bijection() {
  SplitMix64 rng(3003);
  for (int trial = 0; trial < 1000; ++trial) {
    const CompressedIF c = encode(random_input(rng, 32, 400), random_theta(rng), rng.next());
    const auto bytes = serialize(c);
    check(deserialize(bytes) == c, "trial " + std::to_string(trial) + ": round trip differs");
    check(serialize(deserialize(bytes)) == bytes, "re-serialisation is not byte-identical");
    check(payload_bits_exact(c) == bytes.size() * 8,
          "trial " + std::to_string(trial) + ": exact bits " +
              std::to_string(payload_bits_exact(c)) + " vs " + std::to_string(bytes.size() * 8));
  }
}

double ds_wide(const std::vector<std::uint16_t>& ref, int q1, const std::vector<std::uint16_t>& cand,
               int q2) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  cpp_int sum = 0;
  const cpp_int divisor = cpp_int(1) << (q1 - q2);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    cpp_int d = cpp_int(ref[i]) / divisor - cpp_int(cand[i]);
    sum += d < 0 ? cpp_int(-d) : d;
  }
  return static_cast<double>(cpp_rational(sum, cpp_int(ref.size())));
}

void ds_oracle() {
  SplitMix64 rng(4004);
  for (int trial = 0; trial < 100000; ++trial) {
    const int q1 = 1 + static_cast<int>(rng.next() % 16);
    const int q2 = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(q1));
    const std::size_t n = 1 + rng.next() % 64;
    std::vector<std::uint16_t> ref(n);
    std::vector<std::uint16_t> cand(n);
    for (std::size_t i = 0; i < n; ++i) {
      ref[i] = static_cast<std::uint16_t>(rng.next() & ((1u << q1) - 1));
      cand[i] = static_cast<std::uint16_t>(rng.next() & ((1u << q2) - 1));
    }
    const double got = ds_metric(ref, q1, cand, q2);
    const double want = ds_wide(ref, q1, cand, q2);
    check(got == want, "trial " + std::to_string(trial) + ": " + str(got) + " vs " + str(want));
  }
}

void abq_contract() {
  const std::vector<float> example{0.5f, 0.9f, 1.5f, 2.5f};
  const BitSelection ex = abq_select_bits(example, 4, 0.1);
  check(ex.bits == 3, "worked example selected " + std::to_string(ex.bits) + " bits");

  SplitMix64 rng(5005);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng.next() % 80;
    std::vector<float> v(n);
    for (auto& e : v) e = static_cast<float>(rng.next_unit() * 4.0);
    const int q_bit = 1 + static_cast<int>(rng.next() % 16);
    const QuantizedBlock ref = aiq_quantize(v, q_bit);
    int previous = q_bit + 1;
    for (double delta : {0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 8.0}) {
      const BitSelection sel = abq_select_bits(v, q_bit, delta);
      const QuantizedBlock at = aiq_quantize(v, sel.bits);
      const double ds = ds_metric(ref.codes, q_bit, at.codes, sel.bits);
      check(ds <= delta, "DS " + str(ds) + " above delta " + str(delta));
      // Every width between the ceiling and the selection passed.
      for (int q = q_bit - 1; q > sel.bits; --q) {
        check(ds_metric(ref.codes, q_bit, aiq_quantize(v, q).codes, q) <= delta,
              "skipped a passing width");
      }
      check(sel.bits <= previous, "selection grew when delta grew");
      previous = sel.bits;
    }
  }
}

void bound_soundness() {
  SplitMix64 rng(6006);
  for (int trial = 0; trial < 1000; ++trial) {
    const DenseTensor x = random_input(rng, 48, 500);
    const CodecConfig cfg = random_theta(rng);
    const CompressedIF c = encode(x, cfg, rng.next());
    const auto bound = payload_upper_bound(x.rows(), x.cols(), cfg).total();
    check(payload_bits_exact(c) <= bound, "trial " + std::to_string(trial) + ": exact " +
                                              std::to_string(payload_bits_exact(c)) + " > bound " +
                                              std::to_string(bound));
  }
}

void compression_ratio() {
  CodecConfig cfg;
  cfg.sparsity = 0.95;
  cfg.q_bit = 8;
  cfg.blocks_plus = cfg.blocks_minus = 3;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    for (auto dist : {Distribution::kGaussian, Distribution::kUniform}) {
      const DenseTensor x = random_tensor(64, 4096, seed, dist);
      const CompressedIF c = encode(x, cfg, seed);
      worst = std::max(worst, static_cast<double>(c.payload_bits) / static_cast<double>(x.size()));
    }
  }
  check(worst <= 3.2, "bits/element " + str(worst));
  std::cout << "  worst bits/element " << worst << '\n';
}

void planner_oracle() {
  // Worked single-shot example: split 1 is too slow, 3 overflows memory.
  {
    std::vector<SplitEstimate> e(3);
    const double mem[] = {10e6, 20e6, 35e6};
    const double dev[] = {2, 5, 9};
    const double comm[] = {81, 41, 21};
    for (std::size_t i = 0; i < 3; ++i) {
      e[i].ell = i + 1;
      e[i].memory_bytes = mem[i];
      e[i].device_ms = dev[i];
      e[i].comm.comm_ms = comm[i];
    }
    Constraints c;
    c.latency_budget_ms = 50;
    c.memory_budget_bytes = 30e6;
    const SplitPlan plan = select_deepest_single(e, c, CodecConfig{});
    check(plan.feasible && plan.ell == 2, "single-shot worked example chose " +
                                              std::to_string(plan.ell));
  }
  // Worked AR example: (w*, l*) = (2, 3).
  {
    std::vector<SplitEstimate> e(3);
    const double cdev[] = {4, 7, 10};
    const double comm[] = {6, 4, 2};
    for (std::size_t i = 0; i < 3; ++i) {
      e[i].ell = i + 1;
      e[i].compressed_device_ms = cdev[i];
      e[i].comm.comm_ms = comm[i];
    }
    Constraints c;
    c.latency_budget_ms = 30;
    const SplitPlan plan = select_deepest_ar(e, 10.0, c, CodecConfig{}, 5);
    check(plan.feasible && plan.ell == 3 && plan.w == 2,
          "AR worked example chose (w, l) = (" + std::to_string(plan.w) + ", " +
              std::to_string(plan.ell) + ")");
  }

  DeviceTimeModel m;
  m.atkf = {{0.5, 0.0, 0.3}, {0.9, 0.0, 0.2}};
  m.split = {{1, 1, 0.05}};
  m.quant = {{8, 0.05}};
  SplitMix64 rng(8008);
  for (int trial = 0; trial < 200; ++trial) {
    const ModelProfile p = testing::random_profile(rng, 1 + rng.next() % 20);
    Constraints c;
    c.channel.bandwidth_hz = 1e7;
    c.channel.rate_bps = (0.05 + rng.next_unit()) * 1e7;
    c.channel.snr = 1.0 + rng.next_unit() * 20.0;
    c.latency_budget_ms = 5.0 + rng.next_unit() * 300.0;
    c.memory_budget_bytes = rng.next_unit() * 6e7;
    c.ar_offload_cap_bits = rng.next_unit() * 2e5;
    CodecConfig theta;
    theta.sparsity = 0.5 + 0.45 * rng.next_unit();
    const std::size_t w_max = 1 + rng.next() % 8;

    const SplitPlan single = select_split_single(p, c, theta, m);
    const std::size_t want = testing::brute_force_single(p, c, theta, m);
    check(single.ell == want && single.feasible == (want != 0),
          "profile " + std::to_string(trial) + ": single-shot " + std::to_string(single.ell) +
              " vs " + std::to_string(want));

    const SplitPlan ar = select_split_ar(p, c, theta, m, w_max);
    const auto want_ar = testing::brute_force_ar(p, c, theta, m, w_max);
    const bool match = want_ar.first == 0
                           ? !ar.feasible
                           : ar.feasible && ar.ell == want_ar.first && ar.w == want_ar.second;
    check(match, "profile " + std::to_string(trial) + ": AR mismatch");
  }
}

void channel_spot_values() {
  ChannelParams ch;
  ch.bandwidth_hz = 1e6;
  ch.rate_bps = std::log2(11.0) * 1e6;
  ch.snr = 10.0;
  const double po = outage_probability(ch);
  check(std::abs(po - (1.0 - std::exp(-1.0))) <= 1e-9, "P_o = " + str(po));
  const auto retx = retransmission_factor(1e-3, std::exp(-1.0));
  check(retx == 7, "retx = " + std::to_string(retx));
}

void simulator_scaling() {
  SimConfig ec = load_sim_config(kData / "sim_ec_baseline.json");
  SimConfig slicer = load_sim_config(kData / "sim_slicer.json");
  std::vector<std::size_t> ns(16);
  for (std::size_t i = 0; i < ns.size(); ++i) ns[i] = i + 1;
  const auto ec_points = scaling_sweep(ec, ns);
  const auto sl_points = scaling_sweep(slicer, ns);

  const double per_device = ec_points.front().report.busy_ms;
  check(per_device > 0.0, "EC baseline did no work");
  for (const auto& p : ec_points) {
    check(p.report.busy_ms == per_device * static_cast<double>(p.n_devices),
          "EC busy at N=" + std::to_string(p.n_devices) + " is " + str(p.report.busy_ms));
  }
  const double ec_per_request = ec_points.back().report.busy_per_request_ms();
  const double sl_per_request = sl_points.back().report.busy_per_request_ms();
  check(sl_per_request * 2.0 <= ec_per_request,
        "busy/request " + str(sl_per_request) + " vs EC " + str(ec_per_request));
  std::cout << "  dev0 busy/request at N=16: EC " << ec_per_request << " ms, SLICER "
            << sl_per_request << " ms\n";
}

/// Runs cmd with stdout sent to `out` (discarded by default).
int shell(const std::string& cmd, const std::string& out = "/dev/null") {
  const int raw = std::system((cmd + " > " + out + " 2>/dev/null").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void pipeline_determinism() {
  const fs::path root = fs::temp_directory_path() / "slicer_acceptance_determinism";
  fs::remove_all(root);
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  for (const char* run : {"a", "b"}) {
    const fs::path d = root / run;
    fs::create_directories(d);
    const std::string cli = q(kCli);
    check(shell(cli + " gen --rows 64 --cols 512 --seed 9 --out " + q(d / "x.tns")) == 0, "gen");
    check(shell(cli + " encode --in " + q(d / "x.tns") + " --out " + q(d / "x.sif") +
                " --sparsity 0.9 --lambda 0.2 --blocks 3,3 --qbit 8 --delta 0.05 --seed 5") == 0,
          "encode");
    check(shell(cli + " --json decode --in " + q(d / "x.sif") + " --out " + q(d / "y.tns") +
                " --ref " + q(d / "x.tns"), q(d / "decode.json")) == 0,
          "decode");
    check(shell(cli + " plan --profile " + q(kData / "example_profile.json") + " --constraints " +
                q(kData / "example_constraints.json") + " --channel " +
                q(kData / "example_channel.json") + " --out " + q(d / "plan.json")) == 0,
          "plan");
    check(shell(cli + " simulate --config " + q(kData / "sim_slicer.json") + " --csv " +
                q(d / "sim.csv") + " --summary " + q(d / "sim.json")) == 0,
          "simulate");
  }
  for (const char* name : {"x.tns", "x.sif", "y.tns", "decode.json", "plan.json", "sim.csv",
                           "sim.json"}) {
    const std::string a = slurp(root / "a" / name);
    check(!a.empty(), std::string(name) + " is empty");
    check(a == slurp(root / "b" / name), std::string(name) + " differs between runs");
  }
  fs::remove_all(root);
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria{
      {"exact sparsity", exact_sparsity},
      {"codec round-trip bound", codec_round_trip},
      {"serialization bijection", serialization_bijection},
      {"DS wide-integer oracle", ds_oracle},
      {"ABQ contract", abq_contract},
      {"payload bound soundness", bound_soundness},
      {"compression ratio", compression_ratio},
      {"planner brute-force oracle", planner_oracle},
      {"channel spot values", channel_spot_values},
      {"simulator scaling", simulator_scaling},
      {"pipeline determinism", pipeline_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = true;
    try {
      criteria[i].body();
    } catch (const Failure& f) {
      ok = false;
      detail = f.what;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].name;
    if (!ok) std::cout << " (" << detail << ')';
    std::cout << std::endl;
    failed += ok ? 0 : 1;
  }
  std::cout << (criteria.size() - failed) << '/' << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
