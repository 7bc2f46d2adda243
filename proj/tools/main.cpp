// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: `round` runs single-circuit gate rounding,
// `optimize` partitions a large circuit and rounds each block, `verify`
// prints the process-infidelity distance between two circuits.
// Exit codes: 0 success, 1 threshold failure, 2 input error.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tround/tround.hpp"

namespace {

using namespace tround;

constexpr int kExitOk = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitInput = 2;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return bool(out);
}

void print_diagnostics(const std::string& path, const qasm::ParseResult& parsed) {
  for (const auto& d : parsed.diagnostics)
    std::cerr << path << ":" << d.line << ":" << d.column << ": "
              << (d.severity == qasm::SourceDiagnostic::Severity::error ? "error" : "warning")
              << ": " << d.message << "\n";
}

struct ParsedFile {
  Circuit circuit{1};
  ParamVector params;
};

std::optional<ParsedFile> load_circuit(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "error: cannot read '" << path << "'\n";
    return std::nullopt;
  }
  qasm::ParseResult parsed = qasm::parse(*text);
  print_diagnostics(path, parsed);
  if (!parsed.ok()) return std::nullopt;
  return ParsedFile{std::move(*parsed.circuit), std::move(parsed.params)};
}

AngleSet angle_set_by_name(const std::string& name) {
  if (name == "clifford") return AngleSet::clifford();
  if (name == "eighth") return AngleSet::eighth();
  return AngleSet::clifford_t();
}

struct CommonOptions {
  double threshold = 1e-8;
  int starts = 10;
  std::uint64_t seed = 1;
  std::string angle_set = "clifford_t";
  double penalty_factor = 1.0;
  std::string acceptance = "direct";
  int threads = 0;
  std::string out_path, report_path;
};

void add_common_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--threshold", o.threshold, "synthesis error threshold")
      ->check(CLI::Range(1e-300, 1.0));
  cmd->add_option("--starts", o.starts, "multistart count")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--angle-set", o.angle_set, "desired angle set")
      ->check(CLI::IsMember({"clifford_t", "clifford", "eighth"}));
  cmd->add_option("--penalty-factor", o.penalty_factor, "weight of the rounding penalty")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--acceptance", o.acceptance, "feasibility test: snapped distance or bound")
      ->check(CLI::IsMember({"direct", "bound"}));
  cmd->add_option("--threads", o.threads, "worker threads (0 = auto)");
  cmd->add_option("--out", o.out_path, "write the optimized circuit here");
  cmd->add_option("--report", o.report_path, "write a JSON report here");
}

TwoPhaseConfig make_config(const CommonOptions& o, int inner_threads) {
  TwoPhaseConfig cfg;
  cfg.threshold.threshold = o.threshold;
  cfg.threshold.mode = o.acceptance == "bound" ? ThresholdConfig::AcceptanceMode::bound
                                               : ThresholdConfig::AcceptanceMode::direct;
  cfg.fine_set = angle_set_by_name(o.angle_set);
  cfg.penalty_factor = o.penalty_factor;
  cfg.multistart.num_starts = o.starts;
  cfg.multistart.threads = inner_threads;
  cfg.multistart.success_threshold = o.threshold;
  return cfg;
}

void fill_leftover(RunReport& report, const Circuit& circuit, const ParamVector& params,
                   const std::vector<bool>& pinned) {
  int p = 0;
  for (std::size_t gi = 0; gi < circuit.gates().size(); ++gi) {
    const Gate& g = circuit.gates()[gi];
    if (g.kind != GateKind::Rz) continue;
    if (p >= static_cast<int>(pinned.size()) || !pinned[p])
      report.leftover.push_back({static_cast<int>(gi), g.q0, params[p]});
    ++p;
  }
}

int finish(RunReport& report,
           const std::chrono::steady_clock::time_point& started, const CommonOptions& o,
           const Circuit& circuit, const ParamVector& params, int exit_code) {
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!o.out_path.empty() && !write_file(o.out_path, qasm::emit(circuit, params))) {
    std::cerr << "error: cannot write '" << o.out_path << "'\n";
    return kExitInput;
  }
  if (!o.report_path.empty() && !write_file(o.report_path, report_json(report))) {
    std::cerr << "error: cannot write '" << o.report_path << "'\n";
    return kExitInput;
  }
  std::cout << "T count:      " << report.t_count_before << " -> " << report.t_count_after
            << "\n"
            << "Rz count:     " << report.rz_before << " -> " << report.rz_after
            << " (leftover " << report.leftover_rz << ")\n"
            << "distance:     " << report.verified_distance << " (threshold " << report.threshold
            << ")\n"
            << "status:       " << (report.success ? "ok" : "threshold not met") << "\n";
  if (!report.diagnostics.empty()) std::cerr << report.diagnostics << "\n";
  return exit_code;
}

int run_round(const std::string& input, const std::string& target_path, const CommonOptions& o) {
  const auto started = std::chrono::steady_clock::now();
  auto in = load_circuit(input);
  if (!in) return kExitInput;

  std::optional<Target> target;
  if (!target_path.empty()) {
    auto t = load_circuit(target_path);
    if (!t) return kExitInput;
    if (t->circuit.num_qubits() != in->circuit.num_qubits()) {
      std::cerr << "error: target qubit count does not match input\n";
      return kExitInput;
    }
    target = Target{std::move(t->circuit), std::move(t->params)};
  }

  TwoPhaseConfig cfg = make_config(o, o.threads);
  std::mt19937_64 rng(o.seed);
  RoundingOutcome outcome;
  try {
    outcome = two_phase_round(in->circuit, in->params, cfg, rng, std::move(target));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  RunReport report;
  report.input_path = input;
  report.mode = "round";
  report.angle_set = o.angle_set;
  report.threshold = o.threshold;
  report.penalty_factor = o.penalty_factor;
  report.num_starts = o.starts;
  report.seed = o.seed;
  report.n_cliff_t = outcome.n_cliff_t;
  report.n_cliff = outcome.n_cliff_phase;
  report.n_t = outcome.n_t_phase;
  report.t_count_before = t_count(in->circuit);
  report.t_count_after = outcome.n_t_gates;
  report.rz_before = in->circuit.num_params();
  report.rz_after = outcome.final_circuit.num_params();
  report.leftover_rz = outcome.leftover_rz;
  report.verified_distance = outcome.verified_distance;
  report.bound_distance = outcome.bound_distance;
  report.snapped_classes = outcome.class_counts;
  report.success = outcome.feasible;
  report.diagnostics = outcome.diagnostics;
  fill_leftover(report, outcome.final_circuit, outcome.residual_params, outcome.pinned);

  return finish(report, started, o, outcome.final_circuit, outcome.residual_params,
                outcome.feasible ? kExitOk : kExitThreshold);
}

int run_optimize(const std::string& input, int block_size, const std::string& policy,
                 const CommonOptions& o) {
  const auto started = std::chrono::steady_clock::now();
  auto in = load_circuit(input);
  if (!in) return kExitInput;

  PartitionPlan plan;
  plan.block_size = block_size;
  plan.threshold.threshold = o.threshold;
  plan.threshold.mode = o.acceptance == "bound" ? ThresholdConfig::AcceptanceMode::bound
                                                : ThresholdConfig::AcceptanceMode::direct;
  plan.policy = policy == "fixed" ? PartitionPlan::BudgetPolicy::fixed_per_block
                                  : PartitionPlan::BudgetPolicy::uniform;

  std::vector<PartitionBlock> blocks;
  std::vector<RoundingOutcome> outcomes;
  ReassembleResult result;
  try {
    blocks = partition(in->circuit, in->params, plan);
    TwoPhaseConfig cfg = make_config(o, 1);  // parallelism lives at the block level
    outcomes = optimize_blocks(blocks, plan, cfg, o.threads, o.seed);
    result = reassemble(in->circuit, blocks, outcomes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  RunReport report;
  report.input_path = input;
  report.mode = "optimize";
  report.angle_set = o.angle_set;
  report.threshold = o.threshold;
  report.penalty_factor = o.penalty_factor;
  report.num_starts = o.starts;
  report.seed = o.seed;
  report.block_size = block_size;
  report.threshold_policy = policy;
  report.num_blocks = static_cast<int>(blocks.size());
  report.blocks_failed = result.blocks_failed;
  report.t_count_before = result.t_before;
  report.t_count_after = result.t_after;
  report.rz_before = result.rz_before;
  report.rz_after = result.rz_after;
  report.leftover_rz = result.leftover_rz;
  report.verified_distance = result.distance_bound;
  report.bound_distance = result.distance_bound;
  report.snapped_classes = result.class_counts;
  report.success = result.blocks_failed == 0;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    report.blocks.push_back({blocks[i].qubits, outcomes[i].n_cliff_t, outcomes[i].leftover_rz,
                             outcomes[i].verified_distance, !outcomes[i].feasible});
  fill_leftover(report, result.circuit, result.params, result.pinned);

  return finish(report, started, o, result.circuit, result.params,
                report.success ? kExitOk : kExitThreshold);
}

int run_verify(const std::string& a, const std::string& b, double threshold, bool has_threshold) {
  auto fa = load_circuit(a);
  if (!fa) return kExitInput;
  auto fb = load_circuit(b);
  if (!fb) return kExitInput;
  double d;
  try {
    d = circuit_distance(fa->circuit, fa->params, fb->circuit, fb->params);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (d < 1e-12) d = 0.0;  // below the evaluator's resolution
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", d);
  std::cout << buf << "\n";
  if (has_threshold && d > threshold) return kExitThreshold;
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Rz rounding for Clifford+Rz circuits: minimizes the T count needed "
               "after single-qubit synthesis by snapping Rz angles to a desired set"};
  app.require_subcommand(1);

  CommonOptions round_opts;
  std::string round_input, round_target;
  CLI::App* round_cmd = app.add_subcommand("round", "round Rz gates of a single circuit");
  round_cmd->add_option("input", round_input, "input .qasm file")->required();
  round_cmd->add_option("--target", round_target,
                        "optional target circuit (defaults to the input's own unitary)");
  add_common_flags(round_cmd, round_opts);

  CommonOptions opt_opts;
  std::string opt_input, opt_policy = "uniform";
  int opt_block_size = 3;
  CLI::App* opt_cmd = app.add_subcommand("optimize", "partition a large circuit and round blocks");
  opt_cmd->add_option("input", opt_input, "input .qasm file")->required();
  opt_cmd->add_option("--block-size", opt_block_size, "max qubits per block")
      ->check(CLI::Range(2, kMaxDenseQubits));
  opt_cmd->add_option("--threshold-policy", opt_policy, "per-block budget policy")
      ->check(CLI::IsMember({"uniform", "fixed"}));
  add_common_flags(opt_cmd, opt_opts);

  std::string verify_a, verify_b;
  double verify_threshold = 0.0;
  CLI::App* verify_cmd = app.add_subcommand("verify", "print the distance between two circuits");
  verify_cmd->add_option("a", verify_a, "first .qasm file")->required();
  verify_cmd->add_option("b", verify_b, "second .qasm file")->required();
  CLI::Option* vt = verify_cmd->add_option("--threshold", verify_threshold,
                                           "exit 1 if the distance exceeds this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (round_cmd->parsed()) return run_round(round_input, round_target, round_opts);
  if (opt_cmd->parsed()) return run_optimize(opt_input, opt_block_size, opt_policy, opt_opts);
  return run_verify(verify_a, verify_b, verify_threshold, vt->count() > 0);
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
