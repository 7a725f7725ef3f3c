#include "rdpr/solver.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Eigenvalues>

#include "rdpr/rng.hpp"

namespace rdpr {

void SolverConfig::validate() const {
  barrier.validate();
  if (!(init_norm > 0.0 && init_norm < 1.0)) throw PreconditionError("SolverConfig: init_norm must be in (0, 1)");
  if (!(armijo_sigma > 0.0 && armijo_sigma < 1.0)) {
    throw PreconditionError("SolverConfig: armijo_sigma must be in (0, 1)");
  }
  if (!(backtrack_beta > 0.0 && backtrack_beta < 1.0)) {
    throw PreconditionError("SolverConfig: backtrack_beta must be in (0, 1)");
  }
  if (!(step_init > 0.0)) throw PreconditionError("SolverConfig: step_init must be > 0");
  if (!(grad_tol > 0.0)) throw PreconditionError("SolverConfig: grad_tol must be > 0");
  if (max_inner_iters < 1) throw PreconditionError("SolverConfig: max_inner_iters must be >= 1");
  if (!(success_overlap > 0.0 && success_overlap <= 1.0)) {
    throw PreconditionError("SolverConfig: success_overlap must be in (0, 1]");
  }
  if (!(rel_decrease_tol >= 0.0)) throw PreconditionError("SolverConfig: rel_decrease_tol must be >= 0");
  if (!(max_move >= 0.0)) throw PreconditionError("SolverConfig: max_move must be >= 0");
}

nlohmann::json to_json(const SolverResult& r) {
  nlohmann::json j{{"overlap", r.overlap},
                   {"residual", r.residual},
                   {"outer_stages", r.outer_stages},
                   {"inner_iter_total", r.inner_iter_total},
                   {"stalled_stages", r.stalled_stages},
                   {"max_iterate_norm", r.max_iterate_norm},
                   {"objective_monotone", r.objective_monotone},
                   {"x_hat_norm", r.x_hat.norm()},
                   {"x_hat", std::vector<double>(r.x_hat.data(), r.x_hat.data() + r.x_hat.size())}};
  if (r.trace) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& e : *r.trace) {
      t.push_back({{"t0", e.t0}, {"residual", e.residual}, {"overlap", e.overlap}, {"inner_iters", e.inner_iters}});
    }
    j["trace"] = std::move(t);
  }
  return j;
}

Eigen::VectorXd spectral_weights(const MeasurementInstance& inst) {
  const int m = inst.m, d = inst.d;
  Eigen::VectorXd w(static_cast<Eigen::Index>(d) * m);
  for (int i = 0; i < m; ++i) {
    if (!(inst.y_bar[i] > 0.0)) {
      throw DegenerateMeasurementError("spectral_init: measurement " + std::to_string(i) + " is zero");
    }
    const double wi = 1.0 - d / inst.y_bar[i];
    for (int j = 0; j < d; ++j) w[static_cast<Eigen::Index>(j) * m + i] = wi;
  }
  return w;
}

Eigen::MatrixXd spectral_matrix(const MeasurementInstance& inst) {
  const Eigen::VectorXd w = spectral_weights(inst);
  Eigen::MatrixXd M(inst.A.cols(), inst.A.cols());
  M.noalias() = inst.A.transpose() * w.asDiagonal() * inst.A;
  return 0.5 * (M + M.transpose());
}

Eigen::VectorXd leading_eigenvector(const Eigen::MatrixXd& M, double tol, int max_iters) {
  const Eigen::Index n = M.rows();
  if (n == 0 || M.cols() != n) throw PreconditionError("leading_eigenvector: matrix must be square and non-empty");
  if (n == 1) return Eigen::VectorXd::Ones(1);
  const int kmax = max_iters > 0 ? max_iters : static_cast<int>(n);
  const double scale = std::max(M.cwiseAbs().rowwise().sum().maxCoeff(), std::numeric_limits<double>::min());

  Eigen::MatrixXd V(n, kmax + 1);
  Eigen::VectorXd alpha(kmax), beta(kmax);
  Eigen::VectorXd v(n);
  const std::uint64_t key = stream_key(0x5eed, 7);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal_at(key, static_cast<std::uint64_t>(i));
  V.col(0) = v.normalized();
  Eigen::VectorXd w(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  for (int k = 0; k < kmax; ++k) {
    w.noalias() = M * V.col(k);
    alpha[k] = V.col(k).dot(w);
    w -= alpha[k] * V.col(k);
    if (k > 0) w -= beta[k - 1] * V.col(k - 1);
    for (int pass = 0; pass < 2; ++pass) {
      const auto basis = V.leftCols(k + 1);
      w.noalias() -= basis * (basis.transpose() * w);
    }
    beta[k] = w.norm();

    tri.computeFromTridiagonal(alpha.head(k + 1), beta.head(k), Eigen::ComputeEigenvectors);
    const Eigen::Index top = k;  // eigenvalues are sorted ascending
    const double residual = beta[k] * std::fabs(tri.eigenvectors()(k, top));
    const bool exhausted = beta[k] <= 1e-14 * scale || k + 1 == n;
    if (residual <= tol * scale || exhausted) {
      Eigen::VectorXd x = V.leftCols(k + 1) * tri.eigenvectors().col(top);
      return x.normalized();
    }
    V.col(k + 1) = w / beta[k];
  }
  throw EigenError("leading_eigenvector: Lanczos did not converge in " + std::to_string(kmax) + " steps", kmax);
}

Eigen::VectorXd spectral_init(const MeasurementInstance& inst, double init_norm) {
  if (!(init_norm > 0.0 && init_norm < 1.0)) throw PreconditionError("spectral_init: init_norm must be in (0, 1)");
  Eigen::VectorXd v = leading_eigenvector(spectral_matrix(inst));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return init_norm * v.normalized();
}

double overlap(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x_true) {
  const double nx = x_hat.norm();
  if (nx == 0.0) return 0.0;
  return std::min(1.0, std::fabs(x_hat.dot(x_true)) / (nx * x_true.norm()));
}

SolverResult gradbar(const MeasurementInstance& inst, const SolverConfig& cfg,
                     const std::optional<Eigen::VectorXd>& x0) {
  cfg.validate();
  SolverResult res;
  Eigen::VectorXd x = x0 ? *x0 : spectral_init(inst, cfg.init_norm);
  if (x.size() != inst.A.cols()) throw PreconditionError("gradbar: x0 has the wrong length");
  if (!(x.squaredNorm() < 1.0)) throw PreconditionError("gradbar: x0 must lie inside the unit ball");
  res.max_iterate_norm = x.norm();
  if (cfg.record_trace) res.trace.emplace();

  BarrierObjective f(inst, cfg.barrier.t0_init);
  double step = 0.0;
  for (double t0 = cfg.barrier.t0_init; t0 < cfg.barrier.t0_max; t0 *= cfg.barrier.t0_multiplier) {
    f.set_t0(t0);
    GradbackResult gb = gradback(f, x, cfg, step);
    x = std::move(gb.x);
    step = gb.last_step;
    ++res.outer_stages;
    res.inner_iter_total += gb.iterations;
    res.stalled_stages += gb.stalled ? 1 : 0;
    res.objective_monotone = res.objective_monotone && gb.monotone;
    res.max_iterate_norm = std::max(res.max_iterate_norm, gb.max_norm);
    if (res.trace) {
      res.trace->push_back({t0, f_plain_grouped(inst, x), overlap(x, inst.x_true), gb.iterations});
    }
  }
  res.x_hat = x;
  res.overlap = overlap(x, inst.x_true);
  res.residual = f_plain_grouped(inst, x);
  return res;
}

bool is_success(const SolverResult& r, double threshold) { return r.overlap >= threshold; }

double phase_insensitive_error(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x_true) {
  const double nx = x_hat.norm();
  if (nx == 0.0) return x_true.norm();
  const Eigen::VectorXd u = x_hat / nx;
  return std::min((u - x_true).norm(), (u + x_true).norm());
}

}  // namespace rdpr
