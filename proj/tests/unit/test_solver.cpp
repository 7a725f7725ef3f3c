#include "doctest.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "rdpr/solver.hpp"

using namespace rdpr;

namespace {

// f(x) = ||x - p||^2 as a gradback objective.
struct Quadratic {
  Eigen::VectorXd p;
  double value(const Eigen::VectorXd& x) { return x.squaredNorm() < 1.0 ? (x - p).squaredNorm() : INFINITY; }
  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) { g = 2.0 * (x - p); }
};

// Pulls toward a point outside the ball, so the ball constraint binds.
struct OutsidePull {
  Eigen::VectorXd p;
  double value(const Eigen::VectorXd& x) {
    return x.squaredNorm() < 1.0 ? (x - p).squaredNorm() - std::log1p(-x.squaredNorm()) : INFINITY;
  }
  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * (x - p) + 2.0 / (1.0 - x.squaredNorm()) * x;
  }
};

// Stages of t0 <- multiplier * t0 from t0_init while t0 < t0_max.
int schedule_length(const BarrierConfig& b) {
  int k = 0;
  for (double t = b.t0_init; t < b.t0_max; t *= b.t0_multiplier) ++k;
  return k;
}

}  // namespace

TEST_CASE("SolverConfig validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.init_norm = 1.0;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c = {};
  c.backtrack_beta = 1.0;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c = {};
  c.barrier.t0_multiplier = 1.0;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c = {};
  c.max_move = -1.0;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
}

TEST_CASE("spectral weights replicate y_bar") {
  const auto inst = generate_instance(10, 30, 2, 21);
  const Eigen::VectorXd w = spectral_weights(inst);
  REQUIRE(w.size() == 60);
  for (int i = 0; i < inst.m; ++i) {
    CHECK(w[i] == 1.0 - 2.0 / inst.y_bar[i]);
    CHECK(w[inst.m + i] == w[i]);
  }
  auto bad = inst;
  bad.y_bar[3] = 0.0;
  CHECK_THROWS_AS(spectral_init(bad), DegenerateMeasurementError);
}

TEST_CASE("Lanczos matches a dense eigendecomposition") {
  for (int n : {3, 5, 8, 10}) {
    const auto inst = generate_instance(n, 3 * n, 2, 500 + n);
    const Eigen::MatrixXd M = spectral_matrix(inst);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const Eigen::VectorXd ref = es.eigenvectors().col(M.rows() - 1);
    const Eigen::VectorXd v = spectral_init(inst, 0.95);
    CAPTURE(n);
    CHECK(std::fabs(v.normalized().dot(ref)) >= 1.0 - 1e-8);
    CHECK(std::fabs(v.norm() - 0.95) < 1e-12);
    Eigen::Index first = 0;
    while (v[first] == 0.0) ++first;
    CHECK(v[first] > 0.0);
  }
}

TEST_CASE("leading_eigenvector finds the largest algebraic eigenvalue of an indefinite matrix") {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4, 4);
  M.diagonal() << -10.0, 3.0, 1.0, -2.0;
  const Eigen::VectorXd v = leading_eigenvector(M);
  CHECK(std::fabs(v[1]) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(leading_eigenvector(Eigen::MatrixXd(2, 3)), PreconditionError);
}

TEST_CASE("spectral init has macroscopic overlap at alpha = 3") {
  double sum = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto inst = generate_instance(100, 300, 2, 9000 + s);
    sum += overlap(spectral_init(inst), inst.x_true);
  }
  CHECK(sum / 20 > 0.3);
}

TEST_CASE("gradback on a quadratic") {
  Quadratic f{Eigen::VectorXd::Constant(4, 0.25)};
  SolverConfig cfg;
  cfg.rel_decrease_tol = 0.0;
  cfg.max_move = 0.0;
  const auto r = gradback(f, Eigen::VectorXd::Zero(4), cfg, 0.0, true);
  CHECK((r.x - f.p).norm() < 1e-6);
  CHECK(r.monotone);
  for (std::size_t i = 0; i + 1 < r.values.size(); ++i) CHECK(r.values[i + 1] <= r.values[i]);
  CHECK_THROWS_AS(gradback(f, Eigen::VectorXd::Ones(4), cfg), PreconditionError);
}

TEST_CASE("gradback keeps iterates inside the ball") {
  OutsidePull f{Eigen::VectorXd::Constant(3, 5.0)};
  SolverConfig cfg;
  const auto r = gradback(f, Eigen::VectorXd::Zero(3), cfg, 0.0, true);
  CHECK(r.max_norm < 1.0);
  CHECK(r.x.norm() < 1.0);
  CHECK(r.monotone);
  for (std::size_t i = 0; i + 1 < r.values.size(); ++i) CHECK(r.values[i + 1] <= r.values[i]);
}

TEST_CASE("gradback respects the move cap") {
  Quadratic f{Eigen::VectorXd::Constant(2, 0.5)};
  SolverConfig cfg;
  cfg.max_move = 0.01;
  cfg.max_inner_iters = 1;
  const auto r = gradback(f, Eigen::VectorXd::Zero(2), cfg);
  CHECK(r.x.norm() <= 0.01 + 1e-15);
}

TEST_CASE("gradbar from a planted start") {
  const auto inst = generate_instance(50, 200, 2, 314);
  SolverConfig cfg;
  cfg.record_trace = true;
  const auto res = gradbar(inst, cfg, Eigen::VectorXd(0.95 * inst.x_true));
  CHECK(res.overlap >= 0.999);
  CHECK(res.max_iterate_norm < 1.0);
  CHECK(res.x_hat.norm() < 1.0);
  CHECK(res.objective_monotone);
  CHECK(schedule_length(BarrierConfig{}) == 45);
  CHECK(res.outer_stages == schedule_length(BarrierConfig{}));
  REQUIRE(res.trace);
  CHECK(res.trace->size() == static_cast<std::size_t>(res.outer_stages));
  CHECK(res.trace->front().t0 == doctest::Approx(0.01));
  CHECK(is_success(res));
}

TEST_CASE("gradbar is deterministic and phase symmetric") {
  const auto inst = generate_instance(30, 100, 2, 2718);
  SolverConfig cfg;
  const Eigen::VectorXd x0 = spectral_init(inst, cfg.init_norm);
  const auto a = gradbar(inst, cfg, x0);
  const auto b = gradbar(inst, cfg, x0);
  const auto c = gradbar(inst, cfg, Eigen::VectorXd(-x0));
  CHECK(a.x_hat == b.x_hat);
  CHECK(a.inner_iter_total == b.inner_iter_total);
  CHECK(std::fabs(a.overlap - c.overlap) < 1e-6);
  CHECK_THROWS_AS(gradbar(inst, cfg, Eigen::VectorXd(Eigen::VectorXd::Ones(60))), PreconditionError);
  CHECK_THROWS_AS(gradbar(inst, cfg, Eigen::VectorXd(Eigen::VectorXd::Zero(5))), PreconditionError);
}

TEST_CASE("success criterion and phase-insensitive error") {
  SolverResult r;
  r.overlap = 1.0;
  CHECK(is_success(r));
  r.overlap = 0.0;
  CHECK_FALSE(is_success(r));
  Eigen::VectorXd xt = Eigen::VectorXd::Zero(4);
  xt[0] = 1.0;
  const Eigen::VectorXd xh = -0.99 * xt;
  r.overlap = overlap(xh, xt);
  CHECK(r.overlap == doctest::Approx(1.0));
  CHECK(is_success(r));
  CHECK(phase_insensitive_error(xh, xt) < 1e-15);
  Eigen::VectorXd tilted = xt;
  tilted[1] = 0.2;
  const double th = 0.99;
  const double ov = overlap(tilted, xt);
  CHECK((phase_insensitive_error(tilted, xt) <= std::sqrt(2 - 2 * th)) == (ov >= th));
}

TEST_CASE("SolverResult json") {
  const auto inst = generate_instance(10, 40, 2, 1);
  SolverConfig cfg;
  cfg.record_trace = true;
  const auto j = to_json(gradbar(inst, cfg));
  CHECK(j.contains("overlap"));
  CHECK(j.at("x_hat").size() == 20);
  CHECK(j.at("trace").size() == static_cast<std::size_t>(schedule_length(BarrierConfig{})));
}
