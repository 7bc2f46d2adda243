// SPDX-License-Identifier: Apache-2.0
//
// Large circuits cannot be optimized as one dense unitary, so they are
// split into contiguous blocks touching at most k qubits, each block is
// rounded independently against its own unitary, and the optimized
// blocks are substituted back. Summing per-block distances bounds the
// global error, and extending a block unitary by identity on untouched
// qubits does not change the metric, so the bound composes across
// blocks acting on different qubit subsets.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tround/tcount.hpp"

namespace tround {

struct PartitionBlock {
  std::vector<int> qubits;        ///< parent qubit ids, sorted; size <= block_size
  std::vector<int> gate_indices;  ///< contiguous range of parent gate positions
  Circuit local{1};               ///< remapped onto qubits 0..|qubits|-1
  ParamVector local_params;
  std::vector<int> parent_params;  ///< parent slot of each local parameter
};

struct PartitionPlan {
  int block_size = 3;
  ThresholdConfig threshold;
  enum class BudgetPolicy {
    uniform,         ///< per-block threshold = global / number of blocks
    fixed_per_block  ///< every block gets the global threshold
  };
  BudgetPolicy policy = BudgetPolicy::uniform;
};

/// Greedy left-to-right scan: a gate joins the open block while the
/// block's qubit set, grown by the gate's qubits, still fits in
/// block_size; otherwise the block is closed and a new one opened.
/// Concatenating the blocks in order reproduces the parent gate list.
inline std::vector<PartitionBlock> partition(const Circuit& circuit, const ParamVector& params,
                                             const PartitionPlan& plan) {
  if (plan.block_size < 2) throw std::invalid_argument("partition: block_size must be >= 2");
  if (plan.block_size > kMaxDenseQubits)
    throw std::invalid_argument("partition: block_size exceeds dense-unitary limit");
  if (static_cast<int>(params.size()) != circuit.num_params())
    throw std::invalid_argument("partition: parameter count mismatch");

  std::vector<PartitionBlock> blocks;
  std::vector<int> open_qubits;   // sorted
  std::vector<int> open_gates;

  auto close_block = [&]() {
    if (open_gates.empty()) return;
    PartitionBlock b;
    b.qubits = open_qubits;
    b.gate_indices = open_gates;
    b.local = Circuit(static_cast<int>(open_qubits.size()));
    auto local_of = [&](int q) {
      return static_cast<int>(std::lower_bound(b.qubits.begin(), b.qubits.end(), q) -
                              b.qubits.begin());
    };
    for (int gi : open_gates) {
      const Gate& g = circuit.gates()[gi];
      if (g.kind == GateKind::CX) {
        b.local.add_cx(local_of(g.q0), local_of(g.q1));
      } else if (g.kind == GateKind::Rz) {
        b.local.add_rz(local_of(g.q0));
        b.local_params.push_back(params[g.param]);
        b.parent_params.push_back(g.param);
      } else {
        b.local.add(g.kind, g.q0 >= 0 ? local_of(g.q0) : g.q0);
      }
    }
    blocks.push_back(std::move(b));
    open_qubits.clear();
    open_gates.clear();
  };

  const auto& gates = circuit.gates();
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    std::vector<int> gate_qubits{gates[gi].q0};
    if (gates[gi].kind == GateKind::CX) gate_qubits.push_back(gates[gi].q1);

    std::vector<int> merged = open_qubits;
    for (int q : gate_qubits)
      if (!std::binary_search(merged.begin(), merged.end(), q)) {
        merged.insert(std::upper_bound(merged.begin(), merged.end(), q), q);
      }
    if (static_cast<int>(merged.size()) > plan.block_size) {
      close_block();
      merged = gate_qubits;
      std::sort(merged.begin(), merged.end());
    }
    open_qubits = std::move(merged);
    open_gates.push_back(static_cast<int>(gi));
  }
  close_block();
  return blocks;
}

/// Runs two-phase rounding on every block independently, each against
/// its own unitary. Blocks are mapped over a bounded worker pool; a
/// block whose rounding fails is passed through unmodified and flagged
/// (feasible = false). Per-block RNG streams derive from `seed` and the
/// block index, so results do not depend on scheduling.
inline std::vector<RoundingOutcome> optimize_blocks(const std::vector<PartitionBlock>& blocks,
                                                    const PartitionPlan& plan,
                                                    const TwoPhaseConfig& base, int workers,
                                                    std::uint64_t seed) {
  TwoPhaseConfig block_cfg = base;
  if (plan.policy == PartitionPlan::BudgetPolicy::uniform && !blocks.empty())
    block_cfg.threshold.threshold = plan.threshold.threshold / double(blocks.size());
  else
    block_cfg.threshold.threshold = plan.threshold.threshold;
  block_cfg.threshold.mode = plan.threshold.mode;

  std::vector<RoundingOutcome> outcomes(blocks.size());
  parallel_for(static_cast<int>(blocks.size()), workers, [&](int i) {
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * std::uint64_t(i + 1)));
    try {
      outcomes[i] = two_phase_round(blocks[i].local, blocks[i].local_params, block_cfg, rng);
    } catch (const std::exception& e) {
      outcomes[i] = RoundingOutcome{};
      outcomes[i].feasible = false;
      outcomes[i].diagnostics = e.what();
    }
    if (!outcomes[i].feasible) {
      // Pass the block through untouched; downstream keeps a working circuit.
      std::string why = outcomes[i].diagnostics;
      outcomes[i] = RoundingOutcome{};
      outcomes[i].final_circuit = blocks[i].local;
      outcomes[i].residual_params = blocks[i].local_params;
      outcomes[i].leftover_rz = blocks[i].local.num_params();
      outcomes[i].pinned.assign(blocks[i].local.num_params(), false);
      outcomes[i].verified_distance = 0.0;
      outcomes[i].diagnostics = why.empty() ? "block rounding failed" : why;
    }
  });
  return outcomes;
}

struct ReassembleResult {
  Circuit circuit{1};
  ParamVector params;
  std::vector<bool> pinned;
  double distance_bound = 0.0;  ///< sum of per-block verified distances
  int rz_before = 0, rz_after = 0, leftover_rz = 0;
  int t_before = 0, t_after = 0;
  int blocks_failed = 0;
  std::map<std::string, int> class_counts;
};

/// Substitutes each block's optimized circuit back at its position with
/// the inverse qubit remapping.
inline ReassembleResult reassemble(const Circuit& parent,
                                   const std::vector<PartitionBlock>& blocks,
                                   const std::vector<RoundingOutcome>& outcomes) {
  if (blocks.size() != outcomes.size())
    throw std::logic_error("reassemble: blocks and outcomes misaligned");

  ReassembleResult out;
  out.circuit = Circuit(parent.num_qubits());
  out.rz_before = parent.num_params();
  out.t_before = t_count(parent);

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const PartitionBlock& b = blocks[bi];
    const RoundingOutcome& oc = outcomes[bi];
    if (oc.final_circuit.num_qubits() != static_cast<int>(b.qubits.size()))
      throw std::logic_error("reassemble: block qubit remap inconsistent");
    int local_param = 0;
    for (const Gate& g : oc.final_circuit.gates()) {
      if (g.kind == GateKind::CX) {
        out.circuit.add_cx(b.qubits[g.q0], b.qubits[g.q1]);
      } else if (g.kind == GateKind::Rz) {
        out.circuit.add_rz(b.qubits[g.q0]);
        out.params.push_back(oc.residual_params[local_param]);
        out.pinned.push_back(local_param < static_cast<int>(oc.pinned.size()) &&
                             oc.pinned[local_param]);
        ++local_param;
      } else {
        out.circuit.add(g.kind, b.qubits[g.q0]);
      }
    }
    out.distance_bound += oc.verified_distance;
    out.leftover_rz += oc.leftover_rz;
    if (!oc.feasible) ++out.blocks_failed;
    for (const auto& [name, count] : oc.class_counts) out.class_counts[name] += count;
  }
  out.rz_after = out.circuit.num_params();
  out.t_after = t_count(out.circuit);
  return out;
}

}  // namespace tround
