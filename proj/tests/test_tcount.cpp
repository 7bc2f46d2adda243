// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "tround/tcount.hpp"

using namespace tround;
using testutil::kPi;

namespace {

MultistartOptions fast_opts() {
  MultistartOptions o;
  o.num_starts = 6;
  return o;
}

TwoPhaseConfig quick_config(double threshold) {
  TwoPhaseConfig cfg;
  cfg.threshold.threshold = threshold;
  cfg.multistart = fast_opts();
  cfg.multistart.success_threshold = threshold;
  return cfg;
}

}  // namespace

TEST_CASE("snap rewrites pi/4 multiples as fixed gate words") {
  AngleSet d = AngleSet::clifford_t();
  // One Rz per eighth of the circle, plus 0.
  for (int k = 0; k < 8; ++k) {
    Circuit c(1);
    c.add_rz(0);
    const double angle = k * (kPi / 4);
    SnapResult s = snap(c, {angle}, {0}, d);
    CHECK(s.params.empty());  // fully rewritten as fixed gates
    CHECK(distance(build_unitary(s.circuit, {}), rz_matrix(angle)) < 1e-7);
    CHECK(t_count(s.circuit) == (k % 2 ? 1 : 0));  // one T per odd multiple
    if (k == 0) CHECK(s.circuit.empty());
  }
}

TEST_CASE("snap specific words") {
  AngleSet d = AngleSet::clifford_t();
  Circuit c(1);
  c.add_rz(0);

  SnapResult t = snap(c, {kPi / 4}, {0}, d);
  REQUIRE(t.circuit.size() == 1);
  CHECK(t.circuit.gates()[0].kind == GateKind::T);

  SnapResult z = snap(c, {kPi}, {0}, d);
  REQUIRE(z.circuit.size() == 1);
  CHECK(z.circuit.gates()[0].kind == GateKind::Z);

  SnapResult st = snap(c, {3 * kPi / 4}, {0}, d);
  REQUIRE(st.circuit.size() == 2);
  CHECK(st.circuit.gates()[0].kind == GateKind::S);
  CHECK(st.circuit.gates()[1].kind == GateKind::T);
  CHECK(t_count(st.circuit) == 1);

  SnapResult tdg = snap(c, {-kPi / 4}, {0}, d);
  REQUIRE(tdg.circuit.size() == 1);
  CHECK(tdg.circuit.gates()[0].kind == GateKind::Tdg);
}

TEST_CASE("snap keeps unselected gates with re-indexed parameters") {
  Circuit c(2);
  c.add_rz(0);
  c.add_cx(0, 1);
  c.add_rz(1);
  c.add_rz(0);
  SnapResult s = snap(c, {0.3, kPi / 2 + 1e-12, 0.7}, {1}, AngleSet::clifford_t());
  CHECK(s.circuit.num_params() == 2);
  CHECK(s.params == ParamVector{0.3, 0.7});
  CHECK(s.kept_from == std::vector<int>{0, 2});
  CHECK(s.pinned == std::vector<bool>{false, false});
  CHECK_THROWS_AS(snap(c, {0.3, 0.4, 0.5}, {7}, AngleSet::clifford_t()), std::invalid_argument);
}

TEST_CASE("snap pins angles the gate words cannot express") {
  Circuit c(1);
  c.add_rz(0);
  SnapResult s = snap(c, {kPi / 8 + 1e-10}, {0}, AngleSet::eighth());
  REQUIRE(s.params.size() == 1);
  CHECK(s.params[0] == kPi / 8);  // exact set member
  CHECK(s.pinned == std::vector<bool>{true});
  CHECK(s.class_counts.at("sqrt_t") == 1);
}

TEST_CASE("t_count counts explicit T gates only") {
  Circuit c(2);
  c.add(GateKind::T, 0);
  c.add(GateKind::Tdg, 1);
  c.add(GateKind::S, 0);
  c.add_cx(0, 1);
  CHECK(t_count(c) == 2);
  Circuit clifford_only(1);
  clifford_only.add(GateKind::H, 0);
  CHECK(t_count(clifford_only) == 0);
}

TEST_CASE("max_roundable on single-gate instances") {
  SeedPool pool;
  std::mt19937_64 rng(21);

  Circuit c(1);
  c.add_rz(0);

  // Snapping costs ~5e-7, well under a 1e-3 threshold.
  Target near{c, {kPi / 4 + 1e-6}};
  ThresholdConfig loose{1e-3, ThresholdConfig::AcceptanceMode::direct};
  MaxRoundableResult r = max_roundable(c, near, AngleSet::clifford_t(), loose, pool, fast_opts(),
                                       rng);
  CHECK(r.feasible_at_zero);
  CHECK(r.n == 1);

  // A pi/8 angle cannot snap within 1e-6.
  SeedPool pool2;
  Target far{c, {kPi / 8}};
  ThresholdConfig tight{1e-6, ThresholdConfig::AcceptanceMode::direct};
  MaxRoundableResult r2 = max_roundable(c, far, AngleSet::clifford_t(), tight, pool2, fast_opts(),
                                        rng);
  CHECK(r2.feasible_at_zero);
  CHECK(r2.n == 0);

  // No parameters, nothing to round.
  Circuit fixed(1);
  fixed.add(GateKind::H, 0);
  SeedPool pool3;
  MaxRoundableResult r3 = max_roundable(fixed, Target{fixed, {}}, AngleSet::clifford_t(), tight,
                                        pool3, fast_opts(), rng);
  CHECK(r3.n == 0);
}

TEST_CASE("bound acceptance mode uses the additive error estimate") {
  Circuit c(1);
  c.add_rz(0);
  SeedPool pool;
  std::mt19937_64 rng(27);
  ThresholdConfig bound_cfg{1e-3, ThresholdConfig::AcceptanceMode::bound};
  MaxRoundableResult r = max_roundable(c, Target{c, {kPi / 4 + 1e-6}}, AngleSet::clifford_t(),
                                       bound_cfg, pool, fast_opts(), rng);
  CHECK(r.n == 1);

  // The bound is conservative, so a bound-accepted outcome is also
  // sound under direct verification.
  auto [tc, tp] = testutil::toffoli_ansatz();
  TwoPhaseConfig cfg = quick_config(1e-6);
  cfg.threshold.mode = ThresholdConfig::AcceptanceMode::bound;
  std::mt19937_64 rng2(28);
  RoundingOutcome out = two_phase_round(tc, tp, cfg, rng2);
  CHECK(out.feasible);
  CHECK(out.n_t_gates == 7);
  CHECK(out.verified_distance <= 1e-6);
}

TEST_CASE("threshold validation") {
  Circuit c(1);
  c.add_rz(0);
  SeedPool pool;
  std::mt19937_64 rng(1);
  ThresholdConfig bad{2.0, ThresholdConfig::AcceptanceMode::direct};
  CHECK_THROWS_AS(
      max_roundable(c, Target{c, {0.1}}, AngleSet::clifford_t(), bad, pool, fast_opts(), rng),
      std::invalid_argument);
}

TEST_CASE("max_roundable reports infeasibility at N = 0 with diagnostics") {
  Circuit c(1);
  c.add_rz(0);
  Circuit x(1);
  x.add(GateKind::X, 0);
  SeedPool pool;
  std::mt19937_64 rng(33);
  ThresholdConfig cfg{1e-8, ThresholdConfig::AcceptanceMode::direct};
  // An Rz can never reach X.
  MaxRoundableResult r = max_roundable(c, Target{x, {}}, AngleSet::clifford_t(), cfg, pool,
                                       fast_opts(), rng);
  CHECK_FALSE(r.feasible_at_zero);
  CHECK_FALSE(r.diagnostics.empty());
}

TEST_CASE("witness restricted to fewer snaps stays within the composed bound") {
  auto [c, p] = testutil::qft3_ansatz();
  SeedPool pool;
  std::mt19937_64 rng(55);
  Target target{c, p};
  pool.insert({p, 0.0, 0, "clifford_t", 1.0, "input"});
  ThresholdConfig cfg{1e-8, ThresholdConfig::AcceptanceMode::direct};
  MaxRoundableResult r = max_roundable(c, target, AngleSet::clifford_t(), cfg, pool, fast_opts(),
                                       rng);
  REQUIRE(r.n >= 1);
  for (int fewer = 0; fewer <= r.n; ++fewer) {
    ParamVector sub = r.witness.params;
    for (int rank = 0; rank < fewer; ++rank) {
      const int i = r.witness.epsilon.order[rank];
      sub[i] = r.witness.epsilon.nearest[i];
    }
    const double d = circuit_distance(c, sub, c, p);
    const double bound = r.witness.distance_part + r.witness.epsilon.partial_sum(fewer);
    CHECK(d <= bound + 5e-9 + 1e-9);  // slack covers the metric's noise floor
  }
}

TEST_CASE("two_phase_round on the Toffoli ansatz") {
  auto [c, p] = testutil::toffoli_ansatz();
  std::mt19937_64 rng(77);
  RoundingOutcome out = two_phase_round(c, p, quick_config(1e-8), rng);
  CHECK(out.feasible);
  CHECK(out.n_cliff_t == 7);
  CHECK(out.leftover_rz == 0);
  CHECK(out.n_t_gates == 7);
  CHECK(out.n_cliff_phase == 0);
  CHECK(out.final_circuit.num_params() == 0);
  CHECK(out.verified_distance <= 1e-8);
  CHECK(out.cliff_plus_one_infeasible);
  // Re-verification from scratch must agree with the stored value.
  const double again =
      circuit_distance(out.final_circuit, out.residual_params, c, p);
  CHECK(std::abs(again - out.verified_distance) <= 1e-12);
  CHECK(out.verified_distance <= out.bound_distance + 5e-9 + 1e-9);
}

TEST_CASE("two_phase_round absorbs small perturbations against an exact target") {
  auto [c, p] = testutil::toffoli_ansatz();
  std::mt19937_64 noise_rng(101);
  std::uniform_real_distribution<double> noise(-1e-4, 1e-4);
  ParamVector perturbed = p;
  for (double& x : perturbed) x += noise(noise_rng);

  // Self-targeted: the perturbed unitary is the goal, so rounding all 7
  // gates costs about the perturbation itself; 1e-3 covers it.
  std::mt19937_64 rng(5);
  RoundingOutcome self = two_phase_round(c, perturbed, quick_config(1e-3), rng);
  CHECK(self.feasible);
  CHECK(self.leftover_rz == 0);
  CHECK(self.n_t_gates == 7);

  // Against the exact target the solver recovers the clean angles and
  // meets a tight threshold.
  std::mt19937_64 rng2(6);
  RoundingOutcome exact =
      two_phase_round(c, perturbed, quick_config(1e-8), rng2, Target{c, p});
  CHECK(exact.feasible);
  CHECK(exact.leftover_rz == 0);
  CHECK(exact.n_t_gates == 7);
  CHECK(exact.verified_distance <= 1e-8);
}

TEST_CASE("two_phase_round leaves the QFT3 pi/8 rotations as Rz") {
  auto [c, p] = testutil::qft3_ansatz();
  std::mt19937_64 rng(9);
  RoundingOutcome out = two_phase_round(c, p, quick_config(1e-8), rng);
  CHECK(out.feasible);
  CHECK(out.n_cliff_t == 6);
  CHECK(out.leftover_rz == 3);
  // The controlled-phase ladder leaves a continuous degree of freedom
  // between the two q0 rotations, so phase B can place some angles on
  // the Clifford grid; only the total rounded count is rigid.
  CHECK(out.n_cliff_phase >= 0);
  CHECK(out.n_cliff_phase + out.n_t_phase == 6);
  if (out.n_cliff_phase < out.n_cliff_t) CHECK(out.cliff_plus_one_infeasible);
  CHECK(out.final_circuit.num_params() == 3);
  CHECK(out.verified_distance <= 1e-8);
  // Accounting: clifford + t + leftover covers all 9 original gates.
  CHECK(out.n_rounded + out.leftover_rz == 9);
}

TEST_CASE("two_phase_round rounds everything to Clifford when possible") {
  Circuit c(2);
  ParamVector p;
  c.add(GateKind::H, 0);
  c.add_rz(0);
  p.push_back(kPi / 2);
  c.add_cx(0, 1);
  c.add_rz(1);
  p.push_back(kPi);
  c.add_rz(0);
  p.push_back(-kPi / 2);
  std::mt19937_64 rng(13);
  RoundingOutcome out = two_phase_round(c, p, quick_config(1e-8), rng);
  CHECK(out.feasible);
  CHECK(out.n_cliff_phase == 3);
  CHECK(out.n_t_gates == 0);
  CHECK(out.leftover_rz == 0);
  CHECK(out.n_clifford == 3);
}

TEST_CASE("rounding outcome counts stay consistent on random instances") {
  std::mt19937_64 rng(117);
  for (int trial = 0; trial < 4; ++trial) {
    auto [c, p] = testutil::random_circuit(rng, {.min_qubits = 2, .max_qubits = 2, .num_gates = 8});
    std::mt19937_64 solver_rng(trial);
    RoundingOutcome out = two_phase_round(c, p, quick_config(1e-4), solver_rng);
    CHECK(out.feasible);  // self-targeted rounding is feasible at N = 0
    CHECK(out.n_rounded + out.leftover_rz == c.num_params());
    CHECK(out.verified_distance <= 1e-4);
    CHECK(out.n_t_gates == t_count(out.final_circuit));
    const double again = circuit_distance(out.final_circuit, out.residual_params, c, p);
    CHECK(std::abs(again - out.verified_distance) <= 1e-12);
  }
}
