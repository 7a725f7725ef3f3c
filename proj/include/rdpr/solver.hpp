#pragma once

// Spectral initializer, backtracking gradient descent and the log-barrier
// outer loop.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "rdpr/errors.hpp"
#include "rdpr/instance.hpp"

namespace rdpr {

struct SolverConfig {
  BarrierConfig barrier;
  double init_norm = 0.95;
  double armijo_sigma = 1e-4;
  double backtrack_beta = 0.5;
  double step_init = 1.0;
  double grad_tol = 1e-8;
  int max_inner_iters = 2000;
  double success_overlap = 0.99;
  /// Stop a gradback call once an accepted step lowers the objective by
  /// at most this fraction of its magnitude. 0 disables the rule.
  double rel_decrease_tol = 1e-9;
  /// Start each backtracking search at min(step_init, 2 * previous step).
  bool warm_step = true;
  /// Upper bound on the length of a trial move s * ||grad||. 0 disables it.
  double max_move = 0.05;
  bool record_trace = false;

  void validate() const;
};

struct TraceEntry {
  double t0 = 0.0;
  double residual = 0.0;
  double overlap = 0.0;
  int inner_iters = 0;
};

struct SolverResult {
  Eigen::VectorXd x_hat;
  double overlap = 0.0;
  double residual = 0.0;
  int outer_stages = 0;
  int inner_iter_total = 0;
  std::optional<std::vector<TraceEntry>> trace;
  int stalled_stages = 0;
  /// Largest ||x|| over every accepted iterate, including x0.
  double max_iterate_norm = 0.0;
  /// True when each gradback call accepted only non-increasing objective values.
  bool objective_monotone = true;
};

nlohmann::json to_json(const SolverResult& r);

/// M = A^T diag(w) A with w[j*m + i] = 1 - d / y_bar[i].
Eigen::MatrixXd spectral_matrix(const MeasurementInstance& inst);
Eigen::VectorXd spectral_weights(const MeasurementInstance& inst);

/// Eigenvector of the largest algebraic eigenvalue of a symmetric matrix by
/// Lanczos with full reorthogonalization. Converges when the Ritz residual is
/// below tol * ||M||. Throws EigenError after max_iters steps.
Eigen::VectorXd leading_eigenvector(const Eigen::MatrixXd& M, double tol = 1e-10, int max_iters = 0);

/// Leading eigenvector of spectral_matrix, with the first nonzero coordinate
/// positive, scaled to init_norm.
Eigen::VectorXd spectral_init(const MeasurementInstance& inst, double init_norm = 0.95);

struct GradbackResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool stalled = false;
  double last_step = 0.0;
  double max_norm = 0.0;
  bool monotone = true;
  std::vector<double> values;  // filled when requested
};

/// Backtracking descent on an objective exposing value(x) (+inf when
/// infeasible) and gradient(x, g). Trial points must satisfy ||x|| < 1 and
/// the Armijo condition. `step_hint` seeds the first trial step when
/// cfg.warm_step is set.
template <class Objective>
GradbackResult gradback(Objective& f, const Eigen::VectorXd& x0, const SolverConfig& cfg,
                        double step_hint = 0.0, bool record_values = false) {
  if (!(x0.squaredNorm() < 1.0)) throw PreconditionError("gradback: x0 must lie inside the unit ball");
  GradbackResult out;
  out.x = x0;
  out.value = f.value(out.x);
  out.max_norm = out.x.norm();
  if (record_values) out.values.push_back(out.value);
  Eigen::VectorXd g(x0.size()), trial(x0.size());
  double step = (cfg.warm_step && step_hint > 0.0) ? step_hint : cfg.step_init;
  for (out.iterations = 0; out.iterations < cfg.max_inner_iters;) {
    f.gradient(out.x, g);
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) <= cfg.grad_tol) break;
    step = cfg.warm_step ? std::min(cfg.step_init, 2.0 * step) : cfg.step_init;
    if (cfg.max_move > 0.0) step = std::min(step, cfg.max_move / std::sqrt(gn2));
    double trial_value = 0.0;
    for (;;) {
      trial = out.x - step * g;
      if (trial.squaredNorm() < 1.0) {
        trial_value = f.value(trial);
        if (trial_value <= out.value - cfg.armijo_sigma * step * gn2) break;
      }
      step *= cfg.backtrack_beta;
      if (step < 1e-18) {
        out.stalled = true;
        out.last_step = step;
        return out;
      }
    }
    const double decrease = out.value - trial_value;
    if (trial_value > out.value) out.monotone = false;
    out.x.swap(trial);
    out.value = trial_value;
    ++out.iterations;
    out.max_norm = std::max(out.max_norm, out.x.norm());
    if (record_values) out.values.push_back(out.value);
    if (decrease <= cfg.rel_decrease_tol * std::fabs(out.value)) break;
  }
  out.last_step = step;
  return out;
}

/// Log-barrier schedule t0 <- multiplier * t0 from t0_init while t0 < t0_max,
/// each stage a gradback run warm-started from the previous stage.
SolverResult gradbar(const MeasurementInstance& inst, const SolverConfig& cfg,
                     const std::optional<Eigen::VectorXd>& x0 = std::nullopt);

double overlap(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x_true);

bool is_success(const SolverResult& r, double threshold = 0.99);

/// min(||x/||x|| - x_true||, ||x/||x|| + x_true||) for unit x_true.
double phase_insensitive_error(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x_true);

}  // namespace rdpr
