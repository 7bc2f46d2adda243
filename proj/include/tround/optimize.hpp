// SPDX-License-Identifier: Apache-2.0
//
// Multistart local minimization of the composite objective, with a pool
// of previously successful parameter vectors reused as warm starts and a
// two-step strategy: solve the pure matrix-distance problem first, then
// polish those solutions under the full objective. Reusing parameters is
// valid even across different n_round values or angle sets, since the
// circuit (and hence the parameter layout) is fixed within one run.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tround/cost.hpp"
#include "tround/lbfgs.hpp"
#include "tround/parallel.hpp"

namespace tround {

struct MinimizeOptions {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-10;
  int lbfgs_memory = 10;
};

struct OptResult {
  ParamVector params;
  double objective_value = std::numeric_limits<double>::infinity();
  double distance_part = std::numeric_limits<double>::infinity();
  EpsilonVector epsilon;
  int iterations = 0;
  std::string start_label;
};

/// Bounded collection of successful parameter vectors with the context
/// they were produced under. Insertions are serialized; snapshots are
/// value-ordered for deterministic consumption.
class SeedPool {
 public:
  struct Entry {
    ParamVector params;
    double objective_value = 0.0;
    int n_round = 0;
    std::string angle_set_tag;
    double penalty_factor = 1.0;
    std::string label;
  };

  explicit SeedPool(std::size_t capacity = 32) : capacity_(capacity) {}

  void insert(Entry entry) {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const Entry& e : entries_)
      if (e.params == entry.params) return;
    if (entries_.size() < capacity_) {
      entries_.push_back(std::move(entry));
      return;
    }
    auto worst = std::max_element(entries_.begin(), entries_.end(),
                                  [](const Entry& a, const Entry& b) {
                                    return a.objective_value < b.objective_value;
                                  });
    if (worst != entries_.end() && entry.objective_value < worst->objective_value)
      *worst = std::move(entry);
  }

  /// Entries sorted ascending by stored objective (stable on ties).
  std::vector<Entry> snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<Entry> out = entries_;
    std::stable_sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
      return a.objective_value < b.objective_value;
    });
    return out;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

  std::size_t capacity() const { return capacity_; }

 private:
  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::vector<Entry> entries_;
};

struct MultistartOptions {
  int num_starts = 10;
  int threads = 1;  ///< 0 = hardware concurrency
  /// Results at or below this value are inserted into the pool.
  double success_threshold = std::numeric_limits<double>::infinity();
  MinimizeOptions minimize;
};

namespace detail {

/// Uniform double in [-pi, pi) from raw 64-bit draws; avoids the
/// implementation-defined behavior of std::uniform_real_distribution.
inline double uniform_angle(std::mt19937_64& rng) {
  const double u = double(rng() >> 11) * 0x1.0p-53;
  return -std::numbers::pi + kTwoPi * u;
}

inline ParamVector random_start(int n, std::mt19937_64& rng) {
  ParamVector v(n);
  for (double& x : v) x = uniform_angle(rng);
  return v;
}

}  // namespace detail

/// Gradient-based local descent from `start`. Deterministic given
/// (start, options, config); the result never exceeds the objective at
/// the start point.
inline OptResult minimize(const Circuit& circuit, const ObjectiveConfig& config,
                          const ParamVector& start, const MinimizeOptions& options = {}) {
  for (double p : start)
    if (!std::isfinite(p)) throw std::invalid_argument("minimize: non-finite start");

  LbfgsOptions lopts;
  lopts.max_iterations = options.max_iterations;
  lopts.gradient_tolerance = options.gradient_tolerance;
  lopts.memory = options.lbfgs_memory;

  auto fg = [&](const std::vector<double>& x, std::vector<double>& grad) {
    return objective_with_gradient(circuit, x, config, grad).value;
  };
  LbfgsResult lr = lbfgs_minimize(fg, start, lopts);

  OptResult out;
  out.params = std::move(lr.x);
  out.iterations = lr.iterations;
  ObjectiveValue v = objective(circuit, out.params, config);
  out.objective_value = v.value;
  out.distance_part = v.distance_part;
  out.epsilon = std::move(v.epsilon);
  return out;
}

namespace detail {

struct LabeledStart {
  std::string label;
  ParamVector params;
};

/// Pool entries first (best stored value first), then fresh random
/// starts up to `num_starts` total. Random draws happen before any
/// parallel work so the RNG stream is schedule-independent.
inline std::vector<LabeledStart> gather_starts(const Circuit& circuit, const SeedPool& pool,
                                               int num_starts, std::mt19937_64& rng) {
  std::vector<LabeledStart> starts;
  auto entries = pool.snapshot();
  for (std::size_t i = 0; i < entries.size() && static_cast<int>(starts.size()) < num_starts; ++i) {
    if (static_cast<int>(entries[i].params.size()) != circuit.num_params()) continue;
    std::string label = entries[i].label.empty() ? ("pool:" + std::to_string(i)) : entries[i].label;
    starts.push_back({std::move(label), entries[i].params});
  }
  for (int i = 0; static_cast<int>(starts.size()) < num_starts; ++i)
    starts.push_back({"rand:" + std::to_string(i), random_start(circuit.num_params(), rng)});
  return starts;
}

/// Runs minimize from every start in parallel and reduces to the best
/// result (ties by start order). Successful results go into the pool in
/// start order, after the parallel section.
inline OptResult run_starts(const Circuit& circuit, const ObjectiveConfig& config,
                            const std::vector<LabeledStart>& starts, SeedPool& pool,
                            const MultistartOptions& options) {
  std::vector<OptResult> results(starts.size());
  parallel_for(static_cast<int>(starts.size()), options.threads, [&](int i) {
    results[i] = minimize(circuit, config, starts[i].params, options.minimize);
    results[i].start_label = starts[i].label;
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].objective_value < results[best].objective_value) best = i;

  for (const OptResult& r : results)
    if (r.objective_value <= options.success_threshold)
      pool.insert({r.params, r.objective_value, config.n_round, config.angle_set.tag(),
                   config.penalty_factor, ""});
  return results[best];
}

}  // namespace detail

/// Best of `num_starts` local minimizations seeded from the pool and
/// fresh random points.
inline OptResult multistart(const Circuit& circuit, const ObjectiveConfig& config, SeedPool& pool,
                            const MultistartOptions& options, std::mt19937_64& rng) {
  if (options.num_starts < 1) throw std::invalid_argument("multistart: need at least one start");
  auto starts = detail::gather_starts(circuit, pool, options.num_starts, rng);
  return detail::run_starts(circuit, config, starts, pool, options);
}

/// Optional instrumentation for two_step.
struct TwoStepTrace {
  double step1_distance = std::numeric_limits<double>::infinity();
  double step1_full_objective = std::numeric_limits<double>::infinity();
};

/// Step 1 minimizes the pure matrix distance (n_round forced to zero);
/// step 2 polishes every step-1 solution under the full objective.
inline OptResult two_step(const Circuit& circuit, const ObjectiveConfig& config, SeedPool& pool,
                          const MultistartOptions& options, std::mt19937_64& rng,
                          TwoStepTrace* trace = nullptr) {
  if (options.num_starts < 1) throw std::invalid_argument("two_step: need at least one start");

  ObjectiveConfig distance_only = config;
  distance_only.n_round = 0;

  auto starts = detail::gather_starts(circuit, pool, options.num_starts, rng);
  std::vector<OptResult> step1(starts.size());
  parallel_for(static_cast<int>(starts.size()), options.threads, [&](int i) {
    step1[i] = minimize(circuit, distance_only, starts[i].params, options.minimize);
    step1[i].start_label = starts[i].label;
  });

  std::size_t best1 = 0;
  for (std::size_t i = 1; i < step1.size(); ++i)
    if (step1[i].objective_value < step1[best1].objective_value) best1 = i;
  for (const OptResult& r : step1)
    if (r.objective_value <= options.success_threshold)
      pool.insert({r.params, r.objective_value, 0, config.angle_set.tag(), config.penalty_factor,
                   ""});
  if (trace) {
    trace->step1_distance = step1[best1].distance_part;
    trace->step1_full_objective = objective(circuit, step1[best1].params, config).value;
  }
  if (config.n_round == 0) return step1[best1];

  std::vector<detail::LabeledStart> starts2(step1.size());
  for (std::size_t i = 0; i < step1.size(); ++i)
    starts2[i] = {"step1:" + std::to_string(i), step1[i].params};
  return detail::run_starts(circuit, config, starts2, pool, options);
}

}  // namespace tround
