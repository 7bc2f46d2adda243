// SPDX-License-Identifier: Apache-2.0
//
// Shared test fixtures and independent oracles. The naive builder here
// embeds every gate as a full Kronecker-product matrix and multiplies
// them out, deliberately sharing no code with the library's in-place
// application path.

#pragma once

#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "tround/circuit.hpp"
#include "tround/cost.hpp"
#include "tround/unitary.hpp"

namespace testutil {

using tround::Circuit;
using tround::GateKind;
using tround::ParamVector;
using tround::Unitary;

inline constexpr double kPi = std::numbers::pi;

inline Unitary kron(const Unitary& a, const Unitary& b) {
  Unitary out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Full embedded matrix of one gate (qubit 0 = most significant bit).
inline Unitary embed_gate(const tround::Gate& g, const ParamVector& params, int nq) {
  const Eigen::Index dim = Eigen::Index(1) << nq;
  if (g.kind == GateKind::CX) {
    Unitary m = Unitary::Zero(dim, dim);
    const Eigen::Index cmask = Eigen::Index(1) << (nq - 1 - g.q0);
    const Eigen::Index tmask = Eigen::Index(1) << (nq - 1 - g.q1);
    for (Eigen::Index b = 0; b < dim; ++b) m((b & cmask) ? (b ^ tmask) : b, b) = 1.0;
    return m;
  }
  const double theta = g.kind == GateKind::Rz ? params[g.param] : 0.0;
  Unitary m = Unitary::Identity(1, 1);
  for (int q = 0; q < nq; ++q)
    m = kron(m, q == g.q0 ? tround::gate_matrix(g.kind, theta) : Unitary::Identity(2, 2));
  return m;
}

/// Oracle: U = G_{L-1} ... G_0 via explicit matrix products.
inline Unitary naive_build(const Circuit& c, const ParamVector& params) {
  const Eigen::Index dim = Eigen::Index(1) << c.num_qubits();
  Unitary u = Unitary::Identity(dim, dim);
  for (const auto& g : c.gates()) u = embed_gate(g, params, c.num_qubits()) * u;
  return u;
}

/// Haar-distributed random unitary (QR of a Ginibre matrix).
inline Unitary haar_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Unitary a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = std::complex<double>(normal(rng), normal(rng));
  Eigen::HouseholderQR<Unitary> qr(a);
  Unitary q = qr.householderQ();
  Unitary r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    std::complex<double> d = r(j, j);
    q.col(j) *= std::abs(d) == 0.0 ? 1.0 : d / std::abs(d);
  }
  return q;
}

struct RandomCircuitOptions {
  int min_qubits = 1, max_qubits = 4;
  int num_gates = 20;
};

inline std::pair<Circuit, ParamVector> random_circuit(std::mt19937_64& rng,
                                                      RandomCircuitOptions opts = {}) {
  std::uniform_int_distribution<int> nq_dist(opts.min_qubits, opts.max_qubits);
  const int nq = nq_dist(rng);
  Circuit c(nq);
  ParamVector params;
  std::uniform_int_distribution<int> kind_dist(0, 9);
  std::uniform_int_distribution<int> q_dist(0, nq - 1);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int i = 0; i < opts.num_gates; ++i) {
    int k = kind_dist(rng);
    if (k <= 3) {  // bias toward parameterized gates
      params.push_back(angle(rng));
      c.add_rz(q_dist(rng));
    } else if (k <= 6 && nq >= 2) {
      int a = q_dist(rng), b = q_dist(rng);
      while (b == a) b = q_dist(rng);
      c.add_cx(a, b);
    } else {
      static const GateKind fixed[] = {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z,
                                       GateKind::S, GateKind::Sdg, GateKind::T, GateKind::Tdg};
      c.add(fixed[rng() % 8], q_dist(rng));
    }
  }
  return {std::move(c), std::move(params)};
}

/// Standard 7-Rz Clifford+Rz Toffoli decomposition; T gates replaced by
/// Rz(+-pi/4). Qubits: controls 0 and 1, target 2.
inline std::pair<Circuit, ParamVector> toffoli_ansatz() {
  Circuit c(3);
  ParamVector p;
  auto rz = [&](int q, double a) {
    c.add_rz(q);
    p.push_back(a);
  };
  c.add(GateKind::H, 2);
  c.add_cx(1, 2);
  rz(2, -kPi / 4);
  c.add_cx(0, 2);
  rz(2, kPi / 4);
  c.add_cx(1, 2);
  rz(2, -kPi / 4);
  c.add_cx(0, 2);
  rz(1, kPi / 4);
  rz(2, kPi / 4);
  c.add(GateKind::H, 2);
  c.add_cx(0, 1);
  rz(0, kPi / 4);
  rz(1, -kPi / 4);
  c.add_cx(0, 1);
  return {std::move(c), std::move(p)};
}

/// Controlled phase via three Rz gates: angles lambda/2, -lambda/2,
/// lambda/2 (equal to cp(lambda) up to global phase).
inline void add_cp(Circuit& c, ParamVector& p, int a, int b, double lambda) {
  c.add_rz(a);
  p.push_back(lambda / 2);
  c.add_cx(a, b);
  c.add_rz(b);
  p.push_back(-lambda / 2);
  c.add_cx(a, b);
  c.add_rz(b);
  p.push_back(lambda / 2);
}

inline void add_swap(Circuit& c, int a, int b) {
  c.add_cx(a, b);
  c.add_cx(b, a);
  c.add_cx(a, b);
}

/// Textbook 2-qubit QFT: 3 Rz gates at +-pi/4 (one controlled-S).
inline std::pair<Circuit, ParamVector> qft2_ansatz() {
  Circuit c(2);
  ParamVector p;
  c.add(GateKind::H, 0);
  add_cp(c, p, 1, 0, kPi / 2);
  c.add(GateKind::H, 1);
  add_swap(c, 0, 1);
  return {std::move(c), std::move(p)};
}

/// Textbook 3-qubit QFT: 9 Rz gates; six at +-pi/4 (controlled-S), three
/// at +-pi/8 (controlled-T).
inline std::pair<Circuit, ParamVector> qft3_ansatz() {
  Circuit c(3);
  ParamVector p;
  c.add(GateKind::H, 0);
  add_cp(c, p, 1, 0, kPi / 2);
  add_cp(c, p, 2, 0, kPi / 4);
  c.add(GateKind::H, 1);
  add_cp(c, p, 2, 1, kPi / 2);
  c.add(GateKind::H, 2);
  add_swap(c, 0, 2);
  return {std::move(c), std::move(p)};
}

/// Reference n-qubit DFT matrix (big-endian basis, swap included in the
/// ansatz circuits above).
inline Unitary qft_matrix(int nq) {
  const Eigen::Index dim = Eigen::Index(1) << nq;
  Unitary m(dim, dim);
  const double norm = 1.0 / std::sqrt(double(dim));
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index k = 0; k < dim; ++k)
      m(j, k) = std::polar(norm, 2.0 * kPi * double(j) * double(k) / double(dim));
  return m;
}

inline Unitary ccx_matrix() {
  Unitary m = Unitary::Identity(8, 8);
  m.row(6).swap(m.row(7));
  return m;
}

/// Layered rotation ladder: each layer is an Rz on every qubit, a CX
/// staircase, then an H on every qubit (the H row keeps rotations from
/// merging across layers). `planted[i]` marks parameters set to a
/// nonzero multiple of pi/4 plus noise at most `noise`.
struct Ladder {
  Circuit circuit{1};
  ParamVector params;
  std::vector<bool> planted;
};

inline Ladder make_ladder(int num_qubits, int layers, double noise, std::mt19937_64& rng) {
  Ladder l;
  l.circuit = Circuit(num_qubits);
  std::uniform_int_distribution<int> grid(1, 7);
  std::uniform_real_distribution<double> eps(-noise, noise);
  std::uniform_real_distribution<double> generic(0.2, 0.58);
  for (int layer = 0; layer < layers; ++layer) {
    for (int q = 0; q < num_qubits; ++q) {
      const bool plant = (q + layer) % 2 == 0;  // half the angles snappable
      l.circuit.add_rz(q);
      l.params.push_back(plant ? grid(rng) * (kPi / 4) + eps(rng)
                               : (rng() % 2 ? 1.0 : -1.0) * generic(rng));
      l.planted.push_back(plant);
    }
    for (int q = 0; q + 1 < num_qubits; ++q) l.circuit.add_cx(q, q + 1);
    if (layer + 1 < layers)
      for (int q = 0; q < num_qubits; ++q) l.circuit.add(GateKind::H, q);
  }
  return l;
}

}  // namespace testutil
