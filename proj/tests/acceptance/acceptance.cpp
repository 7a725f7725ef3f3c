// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rdpr/experiments.hpp"
#include "rdpr/instance.hpp"
#include "rdpr/lifted_rdt.hpp"
#include "rdpr/parallel.hpp"
#include "rdpr/plain_rdt.hpp"
#include "rdpr/solver.hpp"

using namespace rdpr;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<CurvePoint> plain_curve_from(double alpha, int d, double c, const std::vector<double>& grid,
                                         const std::vector<double>& fq) {
  std::vector<CurvePoint> curve;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = phi0_from_f_q(alpha, d, std::sqrt(std::max(c - grid[i] * grid[i], 0.0)), fq[i]);
    curve.push_back({grid[i], p, std::nullopt, std::max(p, 0.0)});
  }
  return curve;
}

Outcome c1_plain_transition() {
  const auto t = std::chrono::steady_clock::now();
  const auto pt = find_pt_plain(2, 1.0, 2.0, 3.5);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
  const bool ok = pt.alpha_star >= 2.77 && pt.alpha_star <= 2.81 && secs <= 120.0;
  return {ok, "alpha*=" + fmt("%.5f", pt.alpha_star) + " in [2.77, 2.81], " + fmt("%.2f", secs) + " s"};
}

Outcome c2_f_q_anchors() {
  const double z = f_q(RdtQuery::make(1.0, 2, 1.0, 1.0));
  const double v = f_q(RdtQuery::make(1.0, 2, 1.0, 0.0));
  const double exact = 4.0 - std::numbers::pi;

  std::mt19937_64 gen(20240601);
  std::normal_distribution<double> g;
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double a = std::hypot(g(gen), g(gen)), b = std::hypot(g(gen), g(gen));
    const double e = (a - b) * (a - b);
    s += e;
    s2 += e * e;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);

  double worst = 0.0;
  for (int k = 1; k <= 9; ++k) {
    const double x = 0.1 * k;
    worst = std::max(worst, std::fabs(f_q(RdtQuery::make(1.0, 2, 1.0, x)) - f_q_d2_closed(1.0, x)));
  }
  const bool ok = std::fabs(z) < 1e-10 && std::fabs(v - exact) < 1e-6 && std::fabs(v - mean) < 3.0 * se &&
                  worst < 1e-8;
  return {ok, "f_q(1,1)=" + fmt("%.2e", z) + ", f_q(1,0)-(4-pi)=" + fmt("%.2e", v - exact) +
                  ", |MC-f_q|/se=" + fmt("%.2f", std::fabs(v - mean) / se) +
                  ", max |generic-closed|=" + fmt("%.2e", worst)};
}

Outcome c3_plain_shapes(const std::vector<double>& grid, const std::vector<double>& fq) {
  std::string detail;
  bool ok = true;
  for (double a : {2.4, 2.6, 2.79, 3.0}) {
    const auto v = monotone_test(plain_curve_from(a, 2, 1.0, grid, fq));
    const bool want = a > 2.7;
    ok = ok && v.monotone == want;
    detail += fmt("%.2f", a) + (v.monotone ? ":monotone " : ":not-monotone ");
  }
  return {ok, detail};
}

Outcome c4_c_sweep(const std::vector<double>& fq1) {
  const double s = std::sqrt(0.8);
  const auto g1 = uniform_grid(0.005, 0.995, 200);
  const auto g08 = uniform_grid(0.005 * s, 0.995 * s, 200);
  const double m1 = mean_slope(plain_curve_from(2.79, 2, 1.0, g1, fq1));
  const double m08 = mean_slope(plain_curve_from(2.79, 2, 0.8, g08, f_q_grid(2, 0.8, g08)));
  return {m08 < m1, "mean slope c=0.8: " + fmt("%.6f", m08) + ", c=1: " + fmt("%.6f", m1)};
}

Outcome c5_lifted_shapes() {
  const auto t = std::chrono::steady_clock::now();
  const auto grid = uniform_grid(0.005, 0.995, 60);
  const auto profiles = build_profiles(2, 1.0, grid);
  const auto search = LiftedSearchConfig::defaults();
  const auto c25 = curve_lifted(2.5, 2, 1.0, grid, profiles, search, AlphaScaling::per_dn);
  const auto c22 = curve_lifted(2.2, 2, 1.0, grid, profiles, search, AlphaScaling::per_dn);
  const auto v25 = monotone_test(c25);
  const bool max22 = has_interior_local_max(c22);
  double gain = -INFINITY, at = 0.0;
  for (const auto& p : c25) {
    if (p.x > 0.0 && p.x < 0.8 && *p.phi0_lifted - p.phi0_plain > gain) {
      gain = *p.phi0_lifted - p.phi0_plain;
      at = p.x;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
  const bool ok = v25.monotone && max22 && gain >= 1e-4;
  return {ok, std::string("per_dn scaling; alpha=2.5 ") + (v25.monotone ? "monotone" : "not monotone") +
                  " (max slope " + fmt("%.2e", v25.max_positive_slope) + "), alpha=2.2 " +
                  (max22 ? "has" : "lacks") + " an interior max, max lifted-plain=" + fmt("%.5f", gain) +
                  " at x=" + fmt("%.3f", at) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome c6_small_c3() {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> ux(0.05, 0.95), ul(-2.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double x = ux(gen), ry = std::pow(10.0, ul(gen)), gamma = std::pow(10.0, ul(gen));
    const auto q = RdtQuery::make(2.5, 2, 1.0, x);
    const auto p = LiftedSearchPoint::make(1e-6, ry, gamma, q.r);
    worst = std::max(worst, std::fabs(lifted_objective(q, p) - plain_functional(q, f_q(q), ry, gamma)));
  }
  return {worst <= 1e-3, "max |lifted - plain functional| at c3=1e-6 over 5 probes: " + fmt("%.2e", worst)};
}

Outcome c7_gradients() {
  const auto inst = generate_instance(30, 90, 2, 7);
  std::mt19937_64 gen(7);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXd x(60);
    for (auto& v : x) v = g(gen);
    x *= (0.2 + 0.15 * k) / x.norm();
    const double h = 1e-5, t0 = 0.5;
    Eigen::VectorXd fd(60), fdb(60), y = x;
    for (int i = 0; i < 60; ++i) {
      y[i] = x[i] + h;
      const double fp = f_plain_grouped(inst, y), bp = f_bar(inst, t0, y);
      y[i] = x[i] - h;
      const double fm = f_plain_grouped(inst, y), bm = f_bar(inst, t0, y);
      y[i] = x[i];
      fd[i] = (fp - fm) / (2 * h);
      fdb[i] = (bp - bm) / (2 * h);
    }
    worst = std::max(worst, (grad_f_plain(inst, x) - fd).norm() / fd.norm());
    worst = std::max(worst, (grad_f_bar(inst, t0, x) - fdb).norm() / fdb.norm());
  }
  return {worst <= 1e-5, "max relative error vs central differences: " + fmt("%.2e", worst)};
}

Outcome c8_solver_invariants() {
  SolverConfig cfg;
  double max_norm = 0.0, min_planted = 1.0;
  bool monotone = true;
  int runs = 0;
  for (int s = 0; s < 4; ++s) {
    const auto inst = generate_instance(100, 320, 2, 8000 + s);
    for (bool planted : {false, true}) {
      const auto r = planted ? gradbar(inst, cfg, Eigen::VectorXd(cfg.init_norm * inst.x_true)) : gradbar(inst, cfg);
      max_norm = std::max(max_norm, r.max_iterate_norm);
      monotone = monotone && r.objective_monotone;
      if (planted) min_planted = std::min(min_planted, r.overlap);
      ++runs;
    }
  }
  const auto small = generate_instance(50, 200, 2, 50);
  const auto rs = gradbar(small, cfg, Eigen::VectorXd(cfg.init_norm * small.x_true));
  max_norm = std::max(max_norm, rs.max_iterate_norm);
  monotone = monotone && rs.objective_monotone;
  min_planted = std::min(min_planted, rs.overlap);
  ++runs;
  const bool ok = max_norm < 1.0 && monotone && min_planted >= 0.999;
  return {ok, std::to_string(runs) + " runs: max ||x||=" + fmt("%.6f", max_norm) +
                  (monotone ? ", stage objectives non-increasing" : ", objective increased") +
                  ", min planted overlap=" + fmt("%.6f", min_planted)};
}

Outcome c9_simulation() {
  const auto m = ExperimentManifest::sweep_default();
  const auto t = std::chrono::steady_clock::now();
  const auto r = pt_sweep(m);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
  double at16 = -1, at32 = -1;
  std::string rates;
  for (const auto& row : r.rows) {
    if (std::fabs(row.alpha - 1.6) < 1e-9) at16 = row.success_rate;
    if (std::fabs(row.alpha - 3.2) < 1e-9) at32 = row.success_rate;
    rates += fmt("%.1f", row.alpha) + ":" + fmt("%.2f", row.success_rate) + " ";
  }
  const bool cross = r.crossing_estimate && *r.crossing_estimate >= 2.3 && *r.crossing_estimate <= 3.0;
  const bool ok = at32 >= 0.9 && at16 <= 0.1 && cross;
  return {ok, rates + "crossing=" + (r.crossing_estimate ? fmt("%.3f", *r.crossing_estimate) : std::string("none")) +
                  ", " + fmt("%.0f", secs) + " s on " + std::to_string(default_thread_count()) + " thread(s)"};
}

Outcome c10_reproducibility() {
  ExperimentManifest m = ExperimentManifest::sweep_default();
  m.trials_per_alpha = 3;
  SweepOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const std::string a = result_to_csv(pt_sweep(m, one), m);
  const std::string b = result_to_csv(pt_sweep(m, four), m);
  return {a == b, std::string("CSV tables at 1 and 4 threads ") + (a == b ? "identical" : "differ") + " (" +
                      std::to_string(m.alpha_grid.size() * m.trials_per_alpha) + " trials each)"};
}

}  // namespace

int main() {
  const auto grid = uniform_grid(0.005, 0.995, 200);
  const auto fq = f_q_grid(2, 1.0, grid);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"plain phase transition", c1_plain_transition},
      {"f_q anchors", c2_f_q_anchors},
      {"plain curve shape bracketing", [&] { return c3_plain_shapes(grid, fq); }},
      {"smaller c gives steeper curves", [&] { return c4_c_sweep(fq); }},
      {"lifted shape bracketing", c5_lifted_shapes},
      {"c3 -> 0 calibration", c6_small_c3},
      {"gradient correctness", c7_gradients},
      {"solver invariants", c8_solver_invariants},
      {"simulated success rates", c9_simulation},
      {"reproducibility across thread counts", c10_reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s - %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
