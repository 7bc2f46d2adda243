// SPDX-License-Identifier: Apache-2.0
//
// Gate rounding: binary search for the largest number of Rz gates that
// can be snapped to a discrete angle set without the synthesis error
// exceeding a threshold, followed by a two-phase pass that prefers
// Clifford angles over T-class angles. Snapped multiples of pi/4 are
// rewritten as fixed gates; other set members (pi/8-class angles, for
// example) stay as Rz gates pinned exactly on the set.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tround/cost.hpp"
#include "tround/optimize.hpp"

namespace tround {

struct ThresholdConfig {
  enum class AcceptanceMode { direct, bound };
  double threshold = 1e-8;
  /// direct: snap the selected gates and verify the distance of the
  /// resulting circuit. bound: accept on distance_part + penalty sum.
  AcceptanceMode mode = AcceptanceMode::direct;
};

/// A target unitary described as a circuit instance, so verification can
/// rebuild it in extended precision.
struct Target {
  Circuit circuit;
  ParamVector params;
};

/// Angle classes of snapped gates, by cost in the Clifford hierarchy.
enum class AngleClass { identity, clifford, t, sqrt_t, other };

inline const char* angle_class_name(AngleClass c) {
  switch (c) {
    case AngleClass::identity: return "identity";
    case AngleClass::clifford: return "clifford";
    case AngleClass::t: return "t";
    case AngleClass::sqrt_t: return "sqrt_t";
    case AngleClass::other: return "other";
  }
  return "?";
}

inline AngleClass classify_angle(double canonical) {
  const double pi = std::numbers::pi;
  auto near_multiple = [&](double step) {
    const double k = std::round(canonical / step);
    return std::abs(canonical - k * step) <= 1e-9;
  };
  if (std::abs(canonical) <= 1e-9 || std::abs(canonical - kTwoPi) <= 1e-9)
    return AngleClass::identity;
  if (near_multiple(pi / 2)) return AngleClass::clifford;
  if (near_multiple(pi / 4)) return AngleClass::t;
  if (near_multiple(pi / 8)) return AngleClass::sqrt_t;
  return AngleClass::other;
}

struct SnapResult {
  Circuit circuit;
  ParamVector params;
  /// params[i] came from original parameter kept_from[i].
  std::vector<int> kept_from;
  /// params[i] was pinned onto the angle set (rounded, but not
  /// expressible as fixed gates).
  std::vector<bool> pinned;
  std::map<std::string, int> class_counts;
};

/// Replaces each selected Rz gate with its nearest desired angle:
/// multiples of pi/4 become fixed gate words (one T or Tdg per odd
/// multiple), anything else stays an Rz pinned exactly on the set.
/// Unselected Rz gates survive with re-indexed parameter slots.
inline SnapResult snap(const Circuit& circuit, const ParamVector& params,
                       const std::vector<int>& selection, const AngleSet& d) {
  if (static_cast<int>(params.size()) != circuit.num_params())
    throw std::invalid_argument("snap: parameter count mismatch");
  std::set<int> selected(selection.begin(), selection.end());
  for (int i : selected)
    if (i < 0 || i >= circuit.num_params())
      throw std::invalid_argument("snap: selection index out of range");

  const double pi = std::numbers::pi;
  SnapResult out{Circuit(circuit.num_qubits()), {}, {}, {}, {}};
  for (const Gate& g : circuit.gates()) {
    if (g.kind == GateKind::CX) {
      out.circuit.add_cx(g.q0, g.q1);
    } else if (g.kind != GateKind::Rz) {
      out.circuit.add(g.kind, g.q0);
    } else if (!selected.count(g.param)) {
      out.circuit.add_rz(g.q0);
      out.params.push_back(params[g.param]);
      out.kept_from.push_back(g.param);
      out.pinned.push_back(false);
    } else {
      const double phi = d.nearest(params[g.param]);
      out.class_counts[angle_class_name(classify_angle(phi))]++;
      const long long k8 = std::llround(phi / (pi / 4));
      if (std::abs(phi - double(k8) * (pi / 4)) <= 1e-9) {
        // 0..7 eighths of the circle -> {}, T, S, S T, Z, Z T, Sdg, Tdg
        switch (((k8 % 8) + 8) % 8) {
          case 0: break;
          case 1: out.circuit.add(GateKind::T, g.q0); break;
          case 2: out.circuit.add(GateKind::S, g.q0); break;
          case 3: out.circuit.add(GateKind::S, g.q0).add(GateKind::T, g.q0); break;
          case 4: out.circuit.add(GateKind::Z, g.q0); break;
          case 5: out.circuit.add(GateKind::Z, g.q0).add(GateKind::T, g.q0); break;
          case 6: out.circuit.add(GateKind::Sdg, g.q0); break;
          case 7: out.circuit.add(GateKind::Tdg, g.q0); break;
        }
      } else {
        out.circuit.add_rz(g.q0);
        out.params.push_back(phi);
        out.kept_from.push_back(g.param);
        out.pinned.push_back(true);
      }
    }
  }
  return out;
}

/// Number of explicit T and Tdg gates.
inline int t_count(const Circuit& circuit) {
  int n = 0;
  for (const Gate& g : circuit.gates())
    if (is_t_class(g.kind)) ++n;
  return n;
}

struct RoundingOutcome {
  Circuit final_circuit{1};
  ParamVector residual_params;
  int n_rounded = 0;
  int n_clifford = 0;   ///< snapped angles that landed on {k pi/2}
  int n_t_gates = 0;    ///< explicit T/Tdg gates in the final circuit
  int leftover_rz = 0;  ///< free Rz parameters left for downstream approximation
  double verified_distance = 0.0;
  double bound_distance = 0.0;
  bool feasible = false;
  /// Per-phase search results.
  int n_cliff_t = 0, n_cliff_phase = 0, n_t_phase = 0;
  /// Maximality certificate: rounding one more gate to Clifford in phase
  /// B was probed and failed (meaningful when n_cliff_phase < n_cliff_t).
  bool cliff_plus_one_infeasible = false;
  std::vector<bool> pinned;  ///< per residual param: on-set (true) or free
  std::map<std::string, int> class_counts;
  std::string diagnostics;
};

struct MaxRoundableResult {
  int n = 0;
  OptResult witness;
  bool feasible_at_zero = true;
  std::string diagnostics;
};

namespace detail {

/// Witness params with the n cheapest penalties replaced by their
/// nearest set member. Equivalent (up to global phase) to evaluating the
/// snapped circuit, so it serves as the direct feasibility check.
inline ParamVector substituted_params(const OptResult& r, int n) {
  ParamVector p = r.params;
  for (int rank = 0; rank < n; ++rank) {
    const int i = r.epsilon.order[rank];
    p[i] = r.epsilon.nearest[i];
  }
  return p;
}

inline bool check_feasible(const Circuit& circuit, const Target& target, const OptResult& r, int n,
                           const ThresholdConfig& cfg, double penalty_factor) {
  if (cfg.mode == ThresholdConfig::AcceptanceMode::bound)
    return r.distance_part + penalty_factor * r.epsilon.partial_sum(n) <= cfg.threshold;
  const ParamVector p = substituted_params(r, n);
  return circuit_distance(circuit, p, target.circuit, target.params) <= cfg.threshold;
}

struct ProbeCache {
  std::map<int, std::pair<bool, OptResult>> probes;
};

}  // namespace detail

/// Binary search for the largest N such that N gates can be rounded to
/// the set `d` while staying below the threshold. Each probe solves the
/// continuous problem with a multistart two-step solve; a failed probe
/// is retried once from the witness of the highest known-feasible N
/// before it is declared infeasible, since heuristic minimization can
/// break the monotonicity the search relies on.
inline MaxRoundableResult max_roundable(const Circuit& circuit, const Target& target,
                                        const AngleSet& d, const ThresholdConfig& cfg,
                                        SeedPool& pool, const MultistartOptions& options,
                                        std::mt19937_64& rng, double penalty_factor = 1.0) {
  if (!(cfg.threshold > 0.0) || cfg.threshold > 1.0)
    throw std::invalid_argument("threshold must lie in (0, 1]");
  MaxRoundableResult out;
  const int m = circuit.num_params();

  ObjectiveConfig obj;
  obj.target = build_unitary(target.circuit, target.params);
  obj.angle_set = d;
  obj.penalty_factor = penalty_factor;

  detail::ProbeCache cache;
  int best_feasible = -1;

  auto probe = [&](int n) -> bool {
    if (auto it = cache.probes.find(n); it != cache.probes.end()) return it->second.first;
    obj.n_round = n;
    OptResult r = two_step(circuit, obj, pool, options, rng);
    bool ok = detail::check_feasible(circuit, target, r, n, cfg, penalty_factor);
    if (!ok && best_feasible >= 0) {
      const OptResult& witness = cache.probes[best_feasible].second;
      OptResult retry = minimize(circuit, obj, witness.params, options.minimize);
      retry.start_label = "witness-retry";
      if (detail::check_feasible(circuit, target, retry, n, cfg, penalty_factor)) {
        r = std::move(retry);
        ok = true;
      } else if (retry.objective_value < r.objective_value) {
        r = std::move(retry);
      }
    }
    if (ok && n > best_feasible) best_feasible = n;
    cache.probes[n] = {ok, std::move(r)};
    return ok;
  };

  if (!probe(0)) {
    out.feasible_at_zero = false;
    out.witness = cache.probes[0].second;
    std::ostringstream msg;
    msg << "infeasible at N=0: best distance " << out.witness.distance_part
        << " exceeds threshold " << cfg.threshold;
    out.diagnostics = msg.str();
    return out;
  }

  int lo = 0, hi = m;
  while (lo < hi) {
    const int mid = lo + (hi - lo + 1) / 2;
    if (probe(mid))
      lo = mid;
    else
      hi = mid - 1;
  }
  out.n = lo;
  out.witness = cache.probes[lo].second;
  return out;
}

struct TwoPhaseConfig {
  ThresholdConfig threshold;
  AngleSet fine_set = AngleSet::clifford_t();
  AngleSet clifford_set = AngleSet::clifford();
  double penalty_factor = 1.0;
  MultistartOptions multistart;
};

namespace detail {

struct PhaseBState {
  Circuit circuit{1};      // after the Clifford snaps
  ParamVector initial;     // parameters carried into the fine solve
  OptResult fine_result;   // solution of the fine problem on `circuit`
  std::map<std::string, int> cliff_classes;
};

}  // namespace detail

/// Two-phase rounding. Phase A finds N_fine, the most gates roundable to
/// the fine set. Phase B searches for the most of those that can be
/// Clifford angles: round n to {k pi/2}, then round N_fine - n of the
/// remaining gates to the fine set, and accept n only if the combination
/// still meets the threshold. The outcome carries the fully snapped
/// circuit, with leftover_rz = M - N_fine free parameters.
inline RoundingOutcome two_phase_round(const Circuit& circuit, const ParamVector& initial_params,
                                       const TwoPhaseConfig& cfg, std::mt19937_64& rng,
                                       std::optional<Target> explicit_target = std::nullopt) {
  const Target target =
      explicit_target ? std::move(*explicit_target) : Target{circuit, initial_params};
  const int m = circuit.num_params();

  RoundingOutcome out;
  out.final_circuit = circuit;
  out.residual_params = initial_params;
  out.pinned.assign(m, false);
  out.leftover_rz = m;

  SeedPool pool;
  {
    ObjectiveConfig seed_cfg{build_unitary(target.circuit, target.params), cfg.fine_set, 0,
                             cfg.penalty_factor};
    pool.insert({initial_params, objective(circuit, initial_params, seed_cfg).value, 0,
                 cfg.fine_set.tag(), cfg.penalty_factor, "input"});
  }

  // Phase A: how many gates can be rounded at all.
  MaxRoundableResult phase_a = max_roundable(circuit, target, cfg.fine_set, cfg.threshold, pool,
                                             cfg.multistart, rng, cfg.penalty_factor);
  if (!phase_a.feasible_at_zero) {
    out.diagnostics = phase_a.diagnostics;
    out.verified_distance =
        circuit_distance(circuit, initial_params, target.circuit, target.params);
    return out;
  }
  const int n_fine = phase_a.n;
  out.n_cliff_t = n_fine;

  const bool skip_phase_b = cfg.fine_set == cfg.clifford_set;
  const Unitary target_u = build_unitary(target.circuit, target.params);

  // Phase B probe: Clifford-snap n gates, then solve the fine problem on
  // what is left. n = 0 falls back to the phase-A witness so the search
  // always has a feasible floor.
  auto probe_b = [&](int n) -> std::pair<bool, detail::PhaseBState> {
    detail::PhaseBState st;
    if (n == 0) {
      st.circuit = circuit;
      st.initial = phase_a.witness.params;
      st.fine_result = phase_a.witness;
      return {true, st};
    }
    ObjectiveConfig cliff_obj{target_u, cfg.clifford_set, n, cfg.penalty_factor};
    OptResult rc = two_step(circuit, cliff_obj, pool, cfg.multistart, rng);

    std::vector<int> cliff_sel(rc.epsilon.order.begin(), rc.epsilon.order.begin() + n);
    SnapResult snapped = snap(circuit, rc.params, cliff_sel, cfg.clifford_set);
    for (bool p : snapped.pinned)
      if (p)
        throw std::invalid_argument(
            "two_phase_round: Clifford phase set must map onto fixed gates");
    st.circuit = snapped.circuit;
    st.initial = snapped.params;
    st.cliff_classes = snapped.class_counts;

    // Fine solve on the reduced circuit; warm starts come from the main
    // pool restricted to the surviving parameter slots.
    SeedPool sub_pool;
    sub_pool.insert({snapped.params, 0.0, 0, cfg.fine_set.tag(), cfg.penalty_factor, "cliffsnap"});
    for (const auto& e : pool.snapshot()) {
      if (static_cast<int>(e.params.size()) != m) continue;
      ParamVector restricted;
      restricted.reserve(snapped.kept_from.size());
      for (int src : snapped.kept_from) restricted.push_back(e.params[src]);
      sub_pool.insert({std::move(restricted), e.objective_value, e.n_round, e.angle_set_tag,
                       e.penalty_factor, ""});
    }
    ObjectiveConfig fine_obj{target_u, cfg.fine_set, n_fine - n, cfg.penalty_factor};
    st.fine_result = two_step(st.circuit, fine_obj, sub_pool, cfg.multistart, rng);

    bool ok;
    if (cfg.threshold.mode == ThresholdConfig::AcceptanceMode::bound) {
      ok = st.fine_result.distance_part +
               cfg.penalty_factor * st.fine_result.epsilon.partial_sum(n_fine - n) <=
           cfg.threshold.threshold;
    } else {
      const ParamVector p = detail::substituted_params(st.fine_result, n_fine - n);
      ok = circuit_distance(st.circuit, p, target.circuit, target.params) <=
           cfg.threshold.threshold;
    }
    return {ok, st};
  };

  std::map<int, std::pair<bool, detail::PhaseBState>> b_cache;
  auto probe_b_cached = [&](int n) -> bool {
    auto it = b_cache.find(n);
    if (it == b_cache.end()) it = b_cache.emplace(n, probe_b(n)).first;
    return it->second.first;
  };

  int n_cliff = skip_phase_b ? n_fine : 0;
  if (!skip_phase_b) {
    int lo = 0, hi = n_fine;
    probe_b_cached(0);
    while (lo < hi) {
      const int mid = lo + (hi - lo + 1) / 2;
      if (probe_b_cached(mid))
        lo = mid;
      else
        hi = mid - 1;
    }
    n_cliff = lo;
    if (n_cliff < n_fine) out.cliff_plus_one_infeasible = !probe_b_cached(n_cliff + 1);
  }

  const detail::PhaseBState& final_state =
      skip_phase_b ? b_cache.emplace(0, probe_b(0)).first->second.second
                   : b_cache.at(n_cliff).second;

  // Final fine snap and from-scratch verification.
  const int n_t_round = n_fine - (skip_phase_b ? 0 : n_cliff);
  std::vector<int> fine_sel(final_state.fine_result.epsilon.order.begin(),
                            final_state.fine_result.epsilon.order.begin() + n_t_round);
  SnapResult fine_snap =
      snap(final_state.circuit, final_state.fine_result.params, fine_sel, cfg.fine_set);

  out.final_circuit = fine_snap.circuit;
  out.residual_params = fine_snap.params;
  out.pinned = fine_snap.pinned;
  out.n_rounded = n_fine;
  out.leftover_rz = m - n_fine;
  out.n_cliff_phase = skip_phase_b ? n_fine : n_cliff;
  out.n_t_phase = n_fine - out.n_cliff_phase;
  out.class_counts = final_state.cliff_classes;
  for (const auto& [name, count] : fine_snap.class_counts) out.class_counts[name] += count;
  out.n_clifford = 0;
  for (const char* cls : {"identity", "clifford"}) {
    auto it = out.class_counts.find(cls);
    if (it != out.class_counts.end()) out.n_clifford += it->second;
  }
  out.n_t_gates = t_count(out.final_circuit);
  out.verified_distance = circuit_distance(out.final_circuit, out.residual_params, target.circuit,
                                           target.params);
  out.bound_distance = final_state.fine_result.distance_part +
                       final_state.fine_result.epsilon.partial_sum(n_t_round);
  out.feasible = out.verified_distance <= cfg.threshold.threshold;
  return out;
}

}  // namespace tround
