// SPDX-License-Identifier: Apache-2.0
//
// Circuit intermediate representation: an ordered list of gate placements
// over a fixed qubit register. Rz gates reference slots in an external
// parameter vector; every other kind is a fixed Clifford or T-class gate.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tround {

/// Gate kinds supported by the IR.
enum class GateKind { H, X, Y, Z, S, Sdg, T, Tdg, CX, Rz };

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::Y: return "y";
    case GateKind::Z: return "z";
    case GateKind::S: return "s";
    case GateKind::Sdg: return "sdg";
    case GateKind::T: return "t";
    case GateKind::Tdg: return "tdg";
    case GateKind::CX: return "cx";
    case GateKind::Rz: return "rz";
  }
  return "?";
}

inline bool is_two_qubit(GateKind k) { return k == GateKind::CX; }
inline bool is_t_class(GateKind k) { return k == GateKind::T || k == GateKind::Tdg; }

/// Diagonal-in-computational-basis gates admit cheaper matrix application.
inline bool is_diagonal(GateKind k) {
  switch (k) {
    case GateKind::Z:
    case GateKind::S:
    case GateKind::Sdg:
    case GateKind::T:
    case GateKind::Tdg:
    case GateKind::Rz: return true;
    default: return false;
  }
}

struct Gate {
  GateKind kind;
  int q0 = -1;     ///< first (or only) qubit
  int q1 = -1;     ///< CX target; -1 for single-qubit gates
  int param = -1;  ///< Rz parameter slot; -1 otherwise

  bool operator==(const Gate&) const = default;
};

/// Angles in radians, one entry per Rz gate in slot order.
using ParamVector = std::vector<double>;

/// A quantum circuit over num_qubits() lines. Gates are stored in
/// application order (gates()[0] acts first on a state). Rz parameter
/// slots are assigned 0..num_params()-1 in insertion order, so each slot
/// is used by exactly one Rz gate.
class Circuit {
 public:
  explicit Circuit(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1) throw std::invalid_argument("circuit needs at least one qubit");
  }

  Circuit& add(GateKind kind, int qubit) {
    if (kind == GateKind::CX || kind == GateKind::Rz)
      throw std::invalid_argument("wrong overload for cx/rz");
    check_qubit(qubit);
    gates_.push_back(Gate{kind, qubit, -1, -1});
    return *this;
  }

  Circuit& add_cx(int control, int target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw std::invalid_argument("cx needs two distinct qubits");
    gates_.push_back(Gate{GateKind::CX, control, target, -1});
    return *this;
  }

  /// Appends an Rz gate and returns the parameter slot it was assigned.
  int add_rz(int qubit) {
    check_qubit(qubit);
    int slot = num_params_++;
    gates_.push_back(Gate{GateKind::Rz, qubit, -1, slot});
    return slot;
  }

  int num_qubits() const { return num_qubits_; }
  int num_params() const { return num_params_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  bool operator==(const Circuit&) const = default;

 private:
  void check_qubit(int q) const {
    if (q < 0 || q >= num_qubits_)
      throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range");
  }

  int num_qubits_;
  int num_params_ = 0;
  std::vector<Gate> gates_;
};

}  // namespace tround
