// SPDX-License-Identifier: Apache-2.0
//
// Limited-memory BFGS with a backtracking Armijo line search. The
// objectives minimized here are smooth except for triangle-wave kinks
// and a sorted-selection boundary, so the line search treats the
// function as a black box and the curvature pairs are screened before
// they enter the inverse-Hessian approximation. Deterministic: no
// randomness, no tolerance on input order.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace tround {

struct LbfgsOptions {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-10;  ///< stop on ||g||_inf below this
  int memory = 10;                    ///< stored curvature pairs
  int max_line_search = 48;
  double armijo_c = 1e-4;
  /// Cap on the infinity norm of the first trial step (also after a
  /// curvature reset). Keeps the search from vaulting across several
  /// triangle-wave basins before any curvature is known.
  double first_step_limit = 0.25;
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// Minimizes f_and_grad(x, grad_out) -> value starting at x0. Only
/// accepts steps that decrease f, so the result never exceeds f(x0).
template <typename F>
LbfgsResult lbfgs_minimize(F&& f_and_grad, std::vector<double> x0, const LbfgsOptions& opts = {}) {
  const std::size_t n = x0.size();
  LbfgsResult result;
  result.x = std::move(x0);

  std::vector<double> grad(n, 0.0);
  result.f = f_and_grad(result.x, grad);
  if (!std::isfinite(result.f)) throw std::invalid_argument("objective not finite at start");
  if (n == 0) return result;

  std::vector<std::vector<double>> s_hist, y_hist;
  std::vector<double> rho_hist;

  std::vector<double> direction(n), x_new(n), grad_new(n);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (detail::inf_norm(grad) <= opts.gradient_tolerance) break;
    result.iterations = iter + 1;

    // Two-loop recursion for d = -H g.
    direction = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * detail::dot(s_hist[i], direction);
      for (std::size_t j = 0; j < n; ++j) direction[j] -= alpha[i] * y_hist[i][j];
    }
    if (!s_hist.empty()) {
      const double gamma =
          detail::dot(s_hist.back(), y_hist.back()) / detail::dot(y_hist.back(), y_hist.back());
      for (double& d : direction) d *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * detail::dot(y_hist[i], direction);
      for (std::size_t j = 0; j < n; ++j) direction[j] += (alpha[i] - beta) * s_hist[i][j];
    }
    for (double& d : direction) d = -d;

    double dg = detail::dot(direction, grad);
    if (!(dg < 0)) {  // not a descent direction; restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t j = 0; j < n; ++j) direction[j] = -grad[j];
      dg = -detail::dot(grad, grad);
    }

    // Backtracking Armijo search, with a steepest-descent retry before
    // declaring the point stationary (kinks leave no smooth direction).
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        bool already_steepest = true;
        for (std::size_t j = 0; j < n; ++j)
          if (direction[j] != -grad[j]) {
            already_steepest = false;
            break;
          }
        if (already_steepest) break;
        for (std::size_t j = 0; j < n; ++j) direction[j] = -grad[j];
        dg = -detail::dot(grad, grad);
      }
      double step =
          s_hist.empty()
              ? std::min(1.0, opts.first_step_limit /
                                  std::max(opts.first_step_limit, detail::inf_norm(direction)))
              : 1.0;
      for (int ls = 0; ls < opts.max_line_search; ++ls, step *= 0.5) {
        for (std::size_t j = 0; j < n; ++j) x_new[j] = result.x[j] + step * direction[j];
        const double f_new = f_and_grad(x_new, grad_new);
        if (std::isfinite(f_new) && f_new <= result.f + opts.armijo_c * step * dg) {
          // Curvature screening keeps the approximation positive definite.
          std::vector<double> s(n), y(n);
          double sy = 0.0, ss = 0.0, yy = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            s[j] = x_new[j] - result.x[j];
            y[j] = grad_new[j] - grad[j];
            sy += s[j] * y[j];
            ss += s[j] * s[j];
            yy += y[j] * y[j];
          }
          if (sy > 1e-10 * std::sqrt(ss) * std::sqrt(yy)) {
            if (static_cast<int>(s_hist.size()) == opts.memory) {
              s_hist.erase(s_hist.begin());
              y_hist.erase(y_hist.begin());
              rho_hist.erase(rho_hist.begin());
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
          }
          result.x = x_new;
          result.f = f_new;
          grad = grad_new;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;  // no decreasing step exists at this resolution
  }
  return result;
}

}  // namespace tround
