// SPDX-License-Identifier: Apache-2.0
//
// Machine-readable run reports. Key order is fixed by construction so
// identical runs serialize to identical bytes (wall_time_s is the only
// field expected to vary between reruns).

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace tround {

struct LeftoverRz {
  int gate_index = 0;  ///< position in the emitted circuit
  int qubit = 0;
  double angle = 0.0;
};

struct BlockReport {
  std::vector<int> qubits;
  int n_cliff_t = 0;
  int leftover_rz = 0;
  double verified_distance = 0.0;
  bool failed = false;
};

struct RunReport {
  std::string input_path;
  std::string mode;  ///< round | optimize | verify
  std::string angle_set;
  double threshold = 0.0;
  double penalty_factor = 1.0;
  int num_starts = 0;
  std::uint64_t seed = 0;
  int block_size = 0;  ///< 0 when not partitioned
  std::string threshold_policy;
  int num_blocks = 0;
  int blocks_failed = 0;
  int n_cliff_t = -1, n_cliff = -1, n_t = -1;
  int t_count_before = 0, t_count_after = 0;
  int rz_before = 0, rz_after = 0, leftover_rz = 0;
  double verified_distance = 0.0;  ///< per-block sum in partitioned mode
  double bound_distance = 0.0;
  std::map<std::string, int> snapped_classes;
  std::vector<LeftoverRz> leftover;
  std::vector<BlockReport> blocks;
  bool success = false;
  std::string diagnostics;
  double wall_time_s = 0.0;
};

inline nlohmann::ordered_json report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["input"] = r.input_path;
  j["mode"] = r.mode;
  j["angle_set"] = r.angle_set;
  j["threshold"] = r.threshold;
  j["penalty_factor"] = r.penalty_factor;
  j["num_starts"] = r.num_starts;
  j["seed"] = r.seed;
  if (r.block_size > 0) {
    j["block_size"] = r.block_size;
    j["threshold_policy"] = r.threshold_policy;
    j["num_blocks"] = r.num_blocks;
    j["blocks_failed"] = r.blocks_failed;
  }
  j["n_cliff_t"] = r.n_cliff_t;
  j["n_cliff"] = r.n_cliff;
  j["n_t"] = r.n_t;
  j["t_count_before"] = r.t_count_before;
  j["t_count_after"] = r.t_count_after;
  j["rz_before"] = r.rz_before;
  j["rz_after"] = r.rz_after;
  j["leftover_rz"] = r.leftover_rz;
  j["verified_distance"] = r.verified_distance;
  j["bound_distance"] = r.bound_distance;
  j["snapped_classes"] = r.snapped_classes;
  nlohmann::ordered_json lo = nlohmann::ordered_json::array();
  for (const LeftoverRz& l : r.leftover)
    lo.push_back({{"gate", l.gate_index}, {"qubit", l.qubit}, {"angle", l.angle}});
  j["leftover"] = lo;
  if (r.block_size > 0) {
    nlohmann::ordered_json bs = nlohmann::ordered_json::array();
    for (const BlockReport& b : r.blocks)
      bs.push_back({{"qubits", b.qubits},
                    {"n_cliff_t", b.n_cliff_t},
                    {"leftover_rz", b.leftover_rz},
                    {"verified_distance", b.verified_distance},
                    {"failed", b.failed}});
    j["blocks"] = bs;
  }
  j["success"] = r.success;
  j["diagnostics"] = r.diagnostics;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

/// Serialized report with stable key order.
inline std::string report_json(const RunReport& r) { return report_to_json(r).dump(2) + "\n"; }

}  // namespace tround
