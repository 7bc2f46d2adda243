// SPDX-License-Identifier: Apache-2.0
//
// Synthesis-error metric, the rounding penalty toward a discrete angle
// set, and the composite objective that drives gate rounding:
//
//   f(theta) = d(target, U(theta)) + penalty_factor * sum of the N
//              smallest per-parameter rounding penalties
//
// where d is the process-infidelity distance
//   d(U1, U2) = sqrt(1 - |Tr(U1^dagger U2)|^2 / dim^2)
// and the penalty of a single angle is eps(theta) = min_{phi in D}
// |theta - phi| / 2, a triangle wave over the circle.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tround/circuit.hpp"
#include "tround/unitary.hpp"

namespace tround {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle into [0, 2pi).
inline double canonical_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

/// Signed angular difference in [-pi, pi].
inline double angular_difference(double a, double b) { return std::remainder(a - b, kTwoPi); }

namespace detail {

template <typename Real>
Real distance_impl(const MatrixT<Real>& u1, const MatrixT<Real>& u2) {
  if (u1.rows() != u2.rows() || u1.cols() != u2.cols())
    throw std::invalid_argument("distance: dimension mismatch");
  const Real dim = Real(u1.rows());
  std::complex<Real> overlap = u1.conjugate().cwiseProduct(u2).sum();  // Tr(u1^dagger u2)
  const Real c2 = std::norm(overlap / dim);
  return std::sqrt(std::max(Real(0), Real(1) - c2));
}

}  // namespace detail

/// Process-infidelity distance in [0, 1]. Global-phase invariant and
/// symmetric; tiny negative radicands from roundoff are clamped to zero.
inline double distance(const Unitary& u1, const Unitary& u2) {
  return detail::distance_impl<double>(u1, u2);
}

/// Distance between two circuit instances, rebuilt in extended precision.
/// All threshold decisions go through this: with double-precision
/// construction the metric bottoms out near 1e-7, which would drown the
/// default 1e-8 success threshold in rounding noise.
inline double circuit_distance(const Circuit& ca, const ParamVector& pa, const Circuit& cb,
                               const ParamVector& pb) {
  if (ca.num_qubits() != cb.num_qubits())
    throw std::invalid_argument("circuit_distance: qubit count mismatch");
  return static_cast<double>(
      detail::distance_impl<long double>(build_unitary_ld(ca, pa), build_unitary_ld(cb, pb)));
}

/// Error of replacing an Rz angle by one differing by delta:
/// sqrt((1 - cos delta) / 2) = |sin(delta / 2)|.
inline double substitution_error(double delta) { return std::abs(std::sin(delta / 2)); }

/// A discrete set of "desired" Rz angles, either generated as
/// {offset + k * step} or an explicit list interpreted mod 2pi.
/// Generated sets must tile the circle (2pi an integer multiple of step)
/// so that nearest-angle queries are well defined; arbitrary sets can be
/// given as explicit lists.
class AngleSet {
 public:
  static AngleSet multiples_of(double step, std::string tag, double offset = 0.0) {
    if (!(step > 0)) throw std::invalid_argument("angle set step must be positive");
    const double ratio = kTwoPi / step;
    const long long per_period = std::llround(ratio);
    if (per_period < 1 || std::abs(ratio - double(per_period)) > 1e-9)
      throw std::invalid_argument("generated angle set must tile the circle");
    AngleSet s;
    s.tag_ = std::move(tag);
    s.step_ = step;
    s.offset_ = offset;
    s.per_period_ = per_period;
    return s;
  }

  static AngleSet explicit_list(std::vector<double> angles, std::string tag) {
    if (angles.empty()) throw std::invalid_argument("explicit angle set must be non-empty");
    AngleSet s;
    s.tag_ = std::move(tag);
    for (double a : angles) {
      if (!std::isfinite(a)) throw std::invalid_argument("non-finite angle in set");
      s.members_.push_back(canonical_angle(a));
    }
    std::sort(s.members_.begin(), s.members_.end());
    s.members_.erase(std::unique(s.members_.begin(), s.members_.end()), s.members_.end());
    return s;
  }

  /// Angles implementable with at most one T gate: D = {k pi/4}.
  static AngleSet clifford_t() {
    return multiples_of(std::numbers::pi / 4, "clifford_t");
  }
  /// Clifford phase angles only: D = {k pi/2}.
  static AngleSet clifford() { return multiples_of(std::numbers::pi / 2, "clifford"); }
  /// Adds the sqrt(T) level: D = {k pi/8}.
  static AngleSet eighth() { return multiples_of(std::numbers::pi / 8, "eighth"); }

  const std::string& tag() const { return tag_; }
  bool generated() const { return members_.empty(); }
  double step() const { return step_; }

  struct Rounded {
    double nearest;  ///< canonical member in [0, 2pi)
    double delta;    ///< theta minus the raw nearest neighbor (exactly 0 on members)
  };

  /// Nearest member under angular (mod 2pi) distance. Ties break toward
  /// the smaller neighbor. The delta is measured against the neighbor on
  /// theta's own branch of the circle, so it is bit-exactly zero when
  /// theta sits on the set.
  Rounded round(double theta) const {
    if (!std::isfinite(theta)) throw std::invalid_argument("non-finite angle");
    if (generated()) {
      const long long k = nearest_index(theta);
      const double raw = offset_ + double(k) * step_;
      const long long kc = ((k % per_period_) + per_period_) % per_period_;
      return {canonical_angle(offset_ + double(kc) * step_), theta - raw};
    }
    Rounded best{members_.front(), angular_difference(theta, members_.front())};
    for (std::size_t i = 1; i < members_.size(); ++i) {
      const double delta = angular_difference(theta, members_[i]);
      if (std::abs(delta) < std::abs(best.delta)) best = {members_[i], delta};
    }
    return best;
  }

  double nearest(double theta) const { return round(theta).nearest; }

  bool contains(double theta, double tol = 1e-9) const {
    return std::abs(round(theta).delta) <= tol;
  }

  bool operator==(const AngleSet& o) const {
    return step_ == o.step_ && offset_ == o.offset_ && members_ == o.members_;
  }

 private:
  long long nearest_index(double theta) const {
    const double x = (theta - offset_) / step_;
    const double fl = std::floor(x);
    long long k = static_cast<long long>(fl);
    if (x - fl > 0.5) ++k;  // exact midpoints stay on the floor side
    return k;
  }

  std::string tag_;
  double step_ = 0.0, offset_ = 0.0;
  long long per_period_ = 0;
  std::vector<double> members_;  // explicit sets, canonical and sorted
};

/// Triangle-wave rounding penalty of a single angle and its nearest
/// desired angle (canonical in [0, 2pi)).
inline std::pair<double, double> rounding_cost(double theta, const AngleSet& d) {
  const AngleSet::Rounded r = d.round(theta);
  return {std::abs(r.delta) / 2.0, r.nearest};
}

/// Per-parameter penalties plus the permutation sorting them ascending
/// (ties broken by parameter index).
struct EpsilonVector {
  std::vector<double> values;
  std::vector<double> nearest;
  std::vector<double> deltas;  ///< signed theta - nearest, for subgradients
  std::vector<int> order;

  /// Sum of the n smallest penalties, accumulated in sorted order so that
  /// partial sums are monotone in n even in floating point.
  double partial_sum(int n) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += values[order[i]];
    return s;
  }
};

inline EpsilonVector epsilon_vector(const ParamVector& params, const AngleSet& d) {
  EpsilonVector eps;
  eps.values.resize(params.size());
  eps.nearest.resize(params.size());
  eps.deltas.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const AngleSet::Rounded r = d.round(params[i]);
    eps.values[i] = std::abs(r.delta) / 2.0;
    eps.nearest[i] = r.nearest;
    eps.deltas[i] = r.delta;
  }
  eps.order.resize(params.size());
  std::iota(eps.order.begin(), eps.order.end(), 0);
  std::sort(eps.order.begin(), eps.order.end(), [&](int a, int b) {
    if (eps.values[a] != eps.values[b]) return eps.values[a] < eps.values[b];
    return a < b;
  });
  return eps;
}

/// Configuration of the composite objective: how many parameters are
/// pushed toward the angle set and how hard.
struct ObjectiveConfig {
  Unitary target;
  AngleSet angle_set = AngleSet::clifford_t();
  int n_round = 0;
  double penalty_factor = 1.0;
};

struct ObjectiveValue {
  double value = 0.0;
  double distance_part = 0.0;
  EpsilonVector epsilon;
};

namespace detail {

inline void check_objective_args(const Circuit& circuit, const ParamVector& params,
                                 const ObjectiveConfig& config) {
  if (config.target.rows() != (Eigen::Index(1) << circuit.num_qubits()))
    throw std::invalid_argument("objective: target dimension does not match circuit");
  if (config.n_round < 0 || config.n_round > circuit.num_params())
    throw std::invalid_argument("objective: n_round out of range");
  if (!(config.penalty_factor > 0))
    throw std::invalid_argument("objective: penalty factor must be positive");
  if (static_cast<int>(params.size()) != circuit.num_params())
    throw std::invalid_argument("objective: parameter count mismatch");
}

/// Shared evaluation path; fills `gradient` when non-null using a
/// forward/backward sweep that never materializes dU/dtheta_i.
inline ObjectiveValue objective_eval(const Circuit& circuit, const ParamVector& params,
                                     const ObjectiveConfig& config,
                                     std::vector<double>* gradient) {
  check_objective_args(circuit, params, config);
  const int nq = circuit.num_qubits();
  const Eigen::Index dim = Eigen::Index(1) << nq;

  ObjectiveValue out;
  Complex overlap;
  double dist;
  if (gradient) {
    gradient->assign(circuit.num_params(), 0.0);
    ForwardTrace trace = build_with_prefixes(circuit, params);
    overlap = config.target.conjugate().cwiseProduct(trace.unitary).sum() / double(dim);
    dist = std::sqrt(std::max(0.0, 1.0 - std::norm(overlap)));

    // Backward sweep: S = target^dagger * (product of gates after g).
    // At each Rz gate, Tr(S dG F) reduces to a diagonal-weighted sum of
    // (F S)_{jj} because dRz is diagonal.
    Unitary suffix = config.target.adjoint();
    const auto& gates = circuit.gates();
    const double denom = std::max(dist, 1e-12);
    for (std::size_t gi = gates.size(); gi-- > 0;) {
      const Gate& g = gates[gi];
      if (g.kind == GateKind::Rz) {
        const auto d2 = detail::rz_derivative_2x2<double>(params[g.param]);
        const Eigen::Index mask = detail::qubit_mask(g.q0, nq);
        const Unitary& pre = trace.prefix[g.param];
        Complex term = 0.0;
        for (Eigen::Index j = 0; j < dim; ++j) {
          Complex fs = 0.0;
          for (Eigen::Index k = 0; k < dim; ++k) fs += pre(j, k) * suffix(k, j);
          term += ((j & mask) ? d2.m11 : d2.m00) * fs;
        }
        (*gradient)[g.param] = -std::real(std::conj(overlap) * (term / double(dim))) / denom;
      }
      detail::apply_gate_right<double>(suffix, g, params, nq);
    }
  } else {
    Unitary u = build_unitary(circuit, params);
    overlap = config.target.conjugate().cwiseProduct(u).sum() / double(dim);
    dist = std::sqrt(std::max(0.0, 1.0 - std::norm(overlap)));
  }

  out.distance_part = dist;
  out.epsilon = epsilon_vector(params, config.angle_set);
  out.value = dist + config.penalty_factor * out.epsilon.partial_sum(config.n_round);

  if (gradient) {
    // One-sided subgradient of the selected triangle-wave penalties;
    // zero exactly on set members.
    for (int r = 0; r < config.n_round; ++r) {
      const int i = out.epsilon.order[r];
      const double w = out.epsilon.deltas[i];
      if (w > 0)
        (*gradient)[i] += config.penalty_factor / 2.0;
      else if (w < 0)
        (*gradient)[i] -= config.penalty_factor / 2.0;
    }
  }
  return out;
}

}  // namespace detail

/// Composite objective value, its distance part, and the penalty vector.
inline ObjectiveValue objective(const Circuit& circuit, const ParamVector& params,
                                const ObjectiveConfig& config) {
  return detail::objective_eval(circuit, params, config, nullptr);
}

/// Analytic gradient of the composite objective.
inline std::vector<double> objective_gradient(const Circuit& circuit, const ParamVector& params,
                                              const ObjectiveConfig& config) {
  std::vector<double> grad;
  detail::objective_eval(circuit, params, config, &grad);
  return grad;
}

/// Value and gradient in one pass (the optimizer's hot path).
inline ObjectiveValue objective_with_gradient(const Circuit& circuit, const ParamVector& params,
                                              const ObjectiveConfig& config,
                                              std::vector<double>& grad) {
  return detail::objective_eval(circuit, params, config, &grad);
}

}  // namespace tround
