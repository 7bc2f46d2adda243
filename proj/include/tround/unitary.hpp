// SPDX-License-Identifier: Apache-2.0
//
// Dense unitary construction for circuits, with analytic parameter
// gradients. Gates are applied in place with O(dim^2) cost per gate
// instead of forming full embedded matrices. The builders are templated
// on the real scalar so that verification code can rerun a construction
// in extended precision.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "tround/circuit.hpp"

namespace tround {

template <typename Real>
using MatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using Unitary = MatrixT<double>;
using Complex = std::complex<double>;

/// Dense construction is exponential in qubits; partitioning is the
/// intended route for anything wider.
inline constexpr int kMaxDenseQubits = 8;

namespace detail {

template <typename Real>
struct Gate2x2 {
  std::complex<Real> m00, m01, m10, m11;
};

template <typename Real>
Gate2x2<Real> gate_2x2(GateKind kind, Real theta) {
  using C = std::complex<Real>;
  const Real one = Real(1), zero = Real(0);
  const Real inv_sqrt2 = Real(1) / std::sqrt(Real(2));
  const Real pi = std::numbers::pi_v<Real>;
  switch (kind) {
    case GateKind::H: return {C(inv_sqrt2), C(inv_sqrt2), C(inv_sqrt2), C(-inv_sqrt2)};
    case GateKind::X: return {C(zero), C(one), C(one), C(zero)};
    case GateKind::Y: return {C(zero), C(zero, -one), C(zero, one), C(zero)};
    case GateKind::Z: return {C(one), C(zero), C(zero), C(-one)};
    case GateKind::S: return {C(one), C(zero), C(zero), C(zero, one)};
    case GateKind::Sdg: return {C(one), C(zero), C(zero), C(zero, -one)};
    case GateKind::T: return {C(one), C(zero), C(zero), std::polar(one, pi / 4)};
    case GateKind::Tdg: return {C(one), C(zero), C(zero), std::polar(one, -pi / 4)};
    case GateKind::Rz: return {std::polar(one, -theta / 2), C(zero), C(zero), std::polar(one, theta / 2)};
    case GateKind::CX: break;
  }
  throw std::logic_error("gate_2x2: not a single-qubit gate");
}

/// d/dtheta of the Rz matrix: diag(-i/2 e^{-i theta/2}, +i/2 e^{+i theta/2}).
template <typename Real>
Gate2x2<Real> rz_derivative_2x2(Real theta) {
  using C = std::complex<Real>;
  const Real half = Real(1) / 2;
  C d0 = C(Real(0), -half) * std::polar(Real(1), -theta / 2);
  C d1 = C(Real(0), half) * std::polar(Real(1), theta / 2);
  return {d0, C(0), C(0), d1};
}

// Qubit 0 is the most significant bit of a basis index.
inline Eigen::Index qubit_mask(int qubit, int num_qubits) {
  return Eigen::Index(1) << (num_qubits - 1 - qubit);
}

/// u <- (I (x) g (x) I) * u for a single-qubit gate g on `qubit`.
template <typename Real>
void apply_1q_left(MatrixT<Real>& u, const Gate2x2<Real>& g, int qubit, int nq) {
  const Eigen::Index dim = u.rows();
  const Eigen::Index mask = qubit_mask(qubit, nq);
  const bool diag = (g.m01 == std::complex<Real>(0) && g.m10 == std::complex<Real>(0));
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      if (r & mask) continue;
      const Eigen::Index r1 = r | mask;
      if (diag) {
        u(r, c) *= g.m00;
        u(r1, c) *= g.m11;
      } else {
        const std::complex<Real> a = u(r, c), b = u(r1, c);
        u(r, c) = g.m00 * a + g.m01 * b;
        u(r1, c) = g.m10 * a + g.m11 * b;
      }
    }
  }
}

/// u <- u * (I (x) g (x) I).
template <typename Real>
void apply_1q_right(MatrixT<Real>& u, const Gate2x2<Real>& g, int qubit, int nq) {
  const Eigen::Index dim = u.rows();
  const Eigen::Index mask = qubit_mask(qubit, nq);
  const bool diag = (g.m01 == std::complex<Real>(0) && g.m10 == std::complex<Real>(0));
  for (Eigen::Index c = 0; c < dim; ++c) {
    if (c & mask) continue;
    const Eigen::Index c1 = c | mask;
    for (Eigen::Index r = 0; r < dim; ++r) {
      if (diag) {
        u(r, c) *= g.m00;
        u(r, c1) *= g.m11;
      } else {
        const std::complex<Real> a = u(r, c), b = u(r, c1);
        u(r, c) = a * g.m00 + b * g.m10;
        u(r, c1) = a * g.m01 + b * g.m11;
      }
    }
  }
}

template <typename Real>
void apply_cx_left(MatrixT<Real>& u, int control, int target, int nq) {
  const Eigen::Index dim = u.rows();
  const Eigen::Index cmask = qubit_mask(control, nq);
  const Eigen::Index tmask = qubit_mask(target, nq);
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index r = 0; r < dim; ++r)
      if ((r & cmask) && !(r & tmask)) std::swap(u(r, c), u(r | tmask, c));
}

template <typename Real>
void apply_cx_right(MatrixT<Real>& u, int control, int target, int nq) {
  const Eigen::Index dim = u.rows();
  const Eigen::Index cmask = qubit_mask(control, nq);
  const Eigen::Index tmask = qubit_mask(target, nq);
  for (Eigen::Index c = 0; c < dim; ++c)
    if ((c & cmask) && !(c & tmask)) u.col(c).swap(u.col(c | tmask));
}

template <typename Real>
void apply_gate_left(MatrixT<Real>& u, const Gate& g, const ParamVector& params, int nq) {
  if (g.kind == GateKind::CX) {
    apply_cx_left(u, g.q0, g.q1, nq);
  } else {
    const Real theta = g.kind == GateKind::Rz ? Real(params[g.param]) : Real(0);
    apply_1q_left(u, gate_2x2<Real>(g.kind, theta), g.q0, nq);
  }
}

template <typename Real>
void apply_gate_right(MatrixT<Real>& u, const Gate& g, const ParamVector& params, int nq) {
  if (g.kind == GateKind::CX) {
    apply_cx_right(u, g.q0, g.q1, nq);
  } else {
    const Real theta = g.kind == GateKind::Rz ? Real(params[g.param]) : Real(0);
    apply_1q_right(u, gate_2x2<Real>(g.kind, theta), g.q0, nq);
  }
}

template <typename Real>
void check_build_args(const Circuit& circuit, const ParamVector& params) {
  if (static_cast<int>(params.size()) != circuit.num_params())
    throw std::invalid_argument("parameter vector length does not match circuit");
  if (circuit.num_qubits() > kMaxDenseQubits)
    throw std::invalid_argument("circuit too wide for dense construction; partition it");
  for (double p : params)
    if (!std::isfinite(p)) throw std::invalid_argument("non-finite Rz angle");
}

template <typename Real>
MatrixT<Real> build_unitary_impl(const Circuit& circuit, const ParamVector& params) {
  check_build_args<Real>(circuit, params);
  const Eigen::Index dim = Eigen::Index(1) << circuit.num_qubits();
  MatrixT<Real> u = MatrixT<Real>::Identity(dim, dim);
  for (const Gate& g : circuit.gates()) apply_gate_left<Real>(u, g, params, circuit.num_qubits());
  return u;
}

}  // namespace detail

/// The Rz convention used throughout: diag(e^{-i theta/2}, e^{+i theta/2}).
/// T and S equal Rz(pi/4) and Rz(pi/2) up to global phase.
inline Unitary rz_matrix(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("non-finite Rz angle");
  Unitary u(2, 2);
  auto g = detail::gate_2x2<double>(GateKind::Rz, theta);
  u << g.m00, g.m01, g.m10, g.m11;
  return u;
}

/// Fixed 2x2 matrix of a single-qubit gate kind.
inline Unitary gate_matrix(GateKind kind, double theta = 0.0) {
  if (kind == GateKind::CX) {
    Unitary u = Unitary::Identity(4, 4);
    u.row(2).swap(u.row(3));
    return u;
  }
  Unitary u(2, 2);
  auto g = detail::gate_2x2<double>(kind, theta);
  u << g.m00, g.m01, g.m10, g.m11;
  return u;
}

/// Product of the circuit's gate matrices with gates()[0] acting first,
/// i.e. U = G_{L-1} ... G_1 G_0 embedded per qubit placement.
inline Unitary build_unitary(const Circuit& circuit, const ParamVector& params) {
  return detail::build_unitary_impl<double>(circuit, params);
}

/// Extended-precision rebuild, used by verification paths. The metric
/// amplifies rounding noise near zero distance (it behaves like a square
/// root of a quadratic form), so double-precision construction cannot
/// resolve distances near 1e-8; long double can.
inline MatrixT<long double> build_unitary_ld(const Circuit& circuit, const ParamVector& params) {
  return detail::build_unitary_impl<long double>(circuit, params);
}

/// ||U^dagger U - I||_max.
inline double unitarity_defect(const Unitary& u) {
  Unitary p = u.adjoint() * u;
  p -= Unitary::Identity(u.rows(), u.cols());
  return p.cwiseAbs().maxCoeff();
}

inline bool is_unitary(const Unitary& u, double tol = 1e-10) {
  return u.rows() == u.cols() && unitarity_defect(u) <= tol;
}

/// Forward pass that also records, for each parameter, the partial
/// product of all gates preceding its Rz gate. Feeds the gradient sweeps.
struct ForwardTrace {
  Unitary unitary;
  std::vector<Unitary> prefix;      ///< prefix[i] = product before param i's gate
  std::vector<int> gate_position;   ///< gate_position[i] = index of param i's gate
};

inline ForwardTrace build_with_prefixes(const Circuit& circuit, const ParamVector& params) {
  detail::check_build_args<double>(circuit, params);
  const Eigen::Index dim = Eigen::Index(1) << circuit.num_qubits();
  ForwardTrace trace;
  trace.prefix.resize(circuit.num_params());
  trace.gate_position.assign(circuit.num_params(), -1);
  Unitary u = Unitary::Identity(dim, dim);
  const auto& gates = circuit.gates();
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i].kind == GateKind::Rz) {
      trace.prefix[gates[i].param] = u;
      trace.gate_position[gates[i].param] = static_cast<int>(i);
    }
    detail::apply_gate_left<double>(u, gates[i], params, circuit.num_qubits());
  }
  trace.unitary = std::move(u);
  return trace;
}

/// Entry i is dU/dtheta_i as a full (non-unitary) matrix. Intended for
/// tests and small circuits; the objective gradient uses a fused
/// trace-based sweep instead.
inline std::vector<Unitary> build_gradient(const Circuit& circuit, const ParamVector& params) {
  ForwardTrace trace = build_with_prefixes(circuit, params);
  const int nq = circuit.num_qubits();
  const auto& gates = circuit.gates();
  std::vector<Unitary> grads(circuit.num_params());
  for (int p = 0; p < circuit.num_params(); ++p) {
    Unitary m = trace.prefix[p];
    const Gate& g = gates[trace.gate_position[p]];
    detail::apply_1q_left<double>(m, detail::rz_derivative_2x2<double>(params[g.param]), g.q0, nq);
    for (std::size_t i = trace.gate_position[p] + 1; i < gates.size(); ++i)
      detail::apply_gate_left<double>(m, gates[i], params, nq);
    grads[p] = std::move(m);
  }
  return grads;
}

}  // namespace tround
