#pragma once

// Globally adaptive 15-point Gauss-Kronrod integration on finite intervals,
// for scalar and vector-valued integrands. The error estimate follows the
// QUADPACK qk15 heuristic.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rdpr/errors.hpp"

namespace rdpr {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  /// Upper cutoff for integrals over [0, inf).
  double truncation_radius = 12.0;
  int max_subdivisions = 400;

  void validate() const;
};

inline void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw PreconditionError("QuadratureConfig: tolerances must be positive");
  }
  if (!(truncation_radius > 0.0) || !std::isfinite(truncation_radius)) {
    throw PreconditionError("QuadratureConfig: truncation_radius must be positive");
  }
  if (max_subdivisions < 1) {
    throw PreconditionError("QuadratureConfig: max_subdivisions must be >= 1");
  }
}

template <class V>
struct QuadratureResult {
  V value;
  V abs_error;
  int subdivisions = 0;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double qk_error(double resk, double resg, double resabs, double resasc) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  double err = std::fabs(resk - resg);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > uflow / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return err;
}

// One qk15 panel for a scalar integrand.
template <class F>
void qk15(F& f, double a, double b, double& result, double& error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::fabs(resk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = f(center - dx);
    fv2[j] = f(center + dx);
    const double s = fv1[j] + fv2[j];
    resk += kWgk[j] * s;
    resabs += kWgk[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * s;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));
  }
  const double ah = std::fabs(half);
  result = resk * half;
  error = qk_error(resk * half, resg * half, resabs * ah, resasc * ah);
}

// One qk15 panel for a vector integrand f(x, out) writing into `out`.
template <class F>
void qk15_vec(F& f, double a, double b, Eigen::Index n, Eigen::ArrayXd& result,
              Eigen::ArrayXd& error, Eigen::ArrayXd scratch[15]) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  f(center, scratch[14]);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f(center - dx, scratch[2 * j]);
    f(center + dx, scratch[2 * j + 1]);
  }
  const Eigen::ArrayXd& fc = scratch[14];
  Eigen::ArrayXd resk = fc * kWgk[7];
  Eigen::ArrayXd resg = fc * kWg[3];
  Eigen::ArrayXd resabs = resk.abs();
  for (int j = 0; j < 7; ++j) {
    resk += kWgk[j] * (scratch[2 * j] + scratch[2 * j + 1]);
    resabs += kWgk[j] * (scratch[2 * j].abs() + scratch[2 * j + 1].abs());
    if (j % 2 == 1) resg += kWg[j / 2] * (scratch[2 * j] + scratch[2 * j + 1]);
  }
  const Eigen::ArrayXd mean = 0.5 * resk;
  Eigen::ArrayXd resasc = kWgk[7] * (fc - mean).abs();
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * ((scratch[2 * j] - mean).abs() + (scratch[2 * j + 1] - mean).abs());
  }
  const double ah = std::fabs(half);
  result = resk * half;
  error.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    error[i] = qk_error(resk[i] * half, resg[i] * half, resabs[i] * ah, resasc[i] * ah);
  }
}

inline std::vector<double> panel_edges(double a, double b, std::span<const double> breakpoints) {
  std::vector<double> edges{a};
  for (double p : breakpoints) {
    if (p > a && p < b) edges.push_back(p);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace detail

/// Integrates f over [a, b] until the summed error estimate falls below
/// max(abs_tol, rel_tol * |result|). Interior breakpoints seed the initial
/// partition. Throws QuadratureError when max_subdivisions is exhausted.
template <class F>
QuadratureResult<double> integrate_adaptive(F&& f, double a, double b, const QuadratureConfig& cfg,
                                            std::span<const double> breakpoints = {}) {
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  if (a == b) return {0.0, 0.0, 0};
  std::priority_queue<Panel> heap;
  double total = 0.0, total_err = 0.0;
  const auto edges = detail::panel_edges(a, b, breakpoints);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    Panel p{edges[k], edges[k + 1], 0.0, 0.0};
    detail::qk15(f, p.a, p.b, p.value, p.error);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  int panels = static_cast<int>(heap.size());
  while (total_err > std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total))) {
    if (panels >= cfg.max_subdivisions) {
      throw QuadratureError("adaptive quadrature did not converge within " +
                                std::to_string(cfg.max_subdivisions) + " subdivisions",
                            total, total_err);
    }
    const Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("adaptive quadrature reached machine resolution", total, total_err);
    }
    heap.pop();
    Panel left{worst.a, mid, 0.0, 0.0}, right{mid, worst.b, 0.0, 0.0};
    detail::qk15(f, left.a, left.b, left.value, left.error);
    detail::qk15(f, right.a, right.b, right.value, right.error);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed accumulated update round-off.
  total = 0.0;
  total_err = 0.0;
  for (auto h = heap; !h.empty(); h.pop()) {
    total += h.top().value;
    total_err += h.top().error;
  }
  return {total, total_err, panels};
}

/// Vector-valued variant: f(x, out) fills `out` with n components. Every
/// component must meet its own max(abs_tol, rel_tol * |I_k|) target.
template <class F>
QuadratureResult<Eigen::ArrayXd> integrate_adaptive_vec(F&& f, double a, double b, Eigen::Index n,
                                                        const QuadratureConfig& cfg,
                                                        std::span<const double> breakpoints = {}) {
  struct Panel {
    double a, b;
    Eigen::ArrayXd value, error;
    double priority;
  };
  auto cmp = [](const Panel& l, const Panel& r) { return l.priority < r.priority; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> heap(cmp);
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(n), total_err = Eigen::ArrayXd::Zero(n);
  if (a == b) return {total, total_err, 0};
  Eigen::ArrayXd scratch[15];
  for (auto& s : scratch) s.resize(n);

  auto target = [&]() -> Eigen::ArrayXd { return (cfg.rel_tol * total.abs()).max(cfg.abs_tol); };
  auto make_panel = [&](double lo, double hi, const Eigen::ArrayXd& tgt) {
    Panel p{lo, hi, Eigen::ArrayXd(n), Eigen::ArrayXd(n), 0.0};
    detail::qk15_vec(f, lo, hi, n, p.value, p.error, scratch);
    p.priority = (p.error / tgt).maxCoeff();
    return p;
  };

  const auto edges = detail::panel_edges(a, b, breakpoints);
  const Eigen::ArrayXd init_target = Eigen::ArrayXd::Constant(n, cfg.abs_tol);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    Panel p = make_panel(edges[k], edges[k + 1], init_target);
    total += p.value;
    total_err += p.error;
    heap.push(std::move(p));
  }
  int panels = static_cast<int>(heap.size());
  while ((total_err > target()).any()) {
    if (panels >= cfg.max_subdivisions) {
      throw QuadratureError("vector quadrature did not converge within " +
                                std::to_string(cfg.max_subdivisions) + " subdivisions",
                            total.maxCoeff(), total_err.maxCoeff());
    }
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("vector quadrature reached machine resolution", total.maxCoeff(),
                            total_err.maxCoeff());
    }
    heap.pop();
    const Eigen::ArrayXd tgt = target();
    Panel left = make_panel(worst.a, mid, tgt);
    Panel right = make_panel(mid, worst.b, tgt);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++panels;
  }
  total.setZero();
  total_err.setZero();
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  return {total, total_err, panels};
}

/// Integral of f over [0, cfg.truncation_radius]; callers pick the radius so
/// that the neglected tail is below abs_tol.
template <class F>
double integrate_semi_infinite(F&& f, const QuadratureConfig& cfg,
                               std::span<const double> breakpoints = {}) {
  return integrate_adaptive(f, 0.0, cfg.truncation_radius, cfg, breakpoints).value;
}

}  // namespace rdpr
