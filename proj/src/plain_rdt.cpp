#include "rdpr/plain_rdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rdpr/parallel.hpp"
#include "rdpr/specfun.hpp"

namespace rdpr {

RdtQuery RdtQuery::make(double alpha, int d, double c, double x) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw PreconditionError("RdtQuery: alpha must be > 0");
  if (d < 1) throw PreconditionError("RdtQuery: d must be >= 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("RdtQuery: c must be > 0");
  if (!(x >= 0.0) || !std::isfinite(x)) throw PreconditionError("RdtQuery: x must be >= 0");
  const double gap = c - x * x;
  if (gap < -1e-12 * c) throw PreconditionError("RdtQuery: x^2 must not exceed c");
  return {alpha, d, c, x, std::sqrt(std::max(gap, 0.0))};
}

double f_q(const RdtQuery& q, const QuadratureConfig& cfg) {
  cfg.validate();
  const int d = q.d;
  if (q.r == 0.0) return d * (1.0 - q.x) * (1.0 - q.x);
  // Split E||.|| = lambda + excess; the lambda part integrates to 2 x d exactly.
  const double ratio = q.x / q.r;
  auto integrand = [&](double u) {
    if (u == 0.0) return 0.0;
    return noncentral_chi_mean_excess(d, u * ratio) * u * chi_pdf(u, d);
  };
  const double upper = cfg.truncation_radius + std::sqrt(static_cast<double>(d));
  const double integral = integrate_adaptive(integrand, 0.0, upper, cfg).value;
  const double base = d * ((1.0 - q.x) * (1.0 - q.x) + q.r * q.r);
  return std::max(base - 2.0 * q.r * integral, 0.0);
}

double f_q_d2_closed(double c, double x, const QuadratureConfig& cfg) {
  const RdtQuery q = RdtQuery::make(1.0, 2, c, x);
  cfg.validate();
  if (q.r == 0.0) return 2.0 * (1.0 - x) * (1.0 - x);
  const double k = x * x / (2.0 * q.r * q.r);
  const double sqrt_half_pi = std::sqrt(0.5 * std::numbers::pi);
  auto integrand = [&](double u) {
    const double xl = k * u * u;
    const double h = 0.5 * xl;
    const double bracket = (xl + 1.0) * bessel_i0_scaled(h) + xl * bessel_i1_scaled(h);
    return u * sqrt_half_pi * bracket * u * std::exp(-0.5 * u * u);
  };
  const double upper = cfg.truncation_radius + std::numbers::sqrt2;
  const double integral = integrate_adaptive(integrand, 0.0, upper, cfg).value;
  return std::max(2.0 * (1.0 + c) - 2.0 * q.r * integral, 0.0);
}

double phi0_from_f_q(double alpha, int d, double r, double fq) {
  const double v = std::max(std::sqrt(alpha / d * fq) - r, 0.0);
  return v * v;
}

double phi0_plain(const RdtQuery& q, const QuadratureConfig& cfg) {
  return phi0_from_f_q(q.alpha, q.d, q.r, f_q(q, cfg));
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 2) throw PreconditionError("uniform_grid: need at least 2 points");
  if (!(hi > lo)) throw PreconditionError("uniform_grid: hi must exceed lo");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  g.back() = hi;
  return g;
}

namespace {

void check_grid(double c, const std::vector<double>& x_grid) {
  if (x_grid.empty()) throw PreconditionError("x_grid must be non-empty");
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (x_grid[i] < 0.0 || x_grid[i] * x_grid[i] > c * (1.0 + 1e-12)) {
      throw PreconditionError("x_grid values must lie in [0, sqrt(c)]");
    }
    if (i > 0 && !(x_grid[i] > x_grid[i - 1])) {
      throw PreconditionError("x_grid must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> f_q_grid(int d, double c, const std::vector<double>& x_grid,
                             const QuadratureConfig& cfg) {
  check_grid(c, x_grid);
  std::vector<double> out(x_grid.size());
  parallel_for(x_grid.size(), default_thread_count(), [&](std::size_t i) {
    out[i] = f_q(RdtQuery::make(1.0, d, c, x_grid[i]), cfg);
  });
  return out;
}

std::vector<CurvePoint> curve_plain(double alpha, int d, double c, const std::vector<double>& x_grid,
                                    const QuadratureConfig& cfg) {
  RdtQuery::make(alpha, d, c, 0.0);
  const auto fq = f_q_grid(d, c, x_grid, cfg);
  std::vector<CurvePoint> curve(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const RdtQuery q = RdtQuery::make(alpha, d, c, x_grid[i]);
    const double p = phi0_from_f_q(alpha, d, q.r, fq[i]);
    curve[i] = {x_grid[i], p, std::nullopt, std::max(p, 0.0)};
  }
  return curve;
}

MonotonicityVerdict monotone_test(const std::vector<CurvePoint>& curve,
                                  const MonotoneTestOptions& opts) {
  if (static_cast<int>(curve.size()) < opts.min_points) {
    throw PreconditionError("monotone_test: need at least " + std::to_string(opts.min_points) +
                            " points");
  }
  if (curve.front().x > 0.01 * opts.span + 1e-12 || curve.back().x < 0.99 * opts.span - 1e-12) {
    throw PreconditionError("monotone_test: grid does not span [0.01, 0.99] of the curve extent");
  }
  MonotonicityVerdict v;
  v.max_positive_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const double dx = curve[i + 1].x - curve[i].x;
    if (!(dx > 0.0)) throw PreconditionError("monotone_test: x must be strictly increasing");
    const double slope = (curve[i + 1].best_bound - curve[i].best_bound) / dx;
    if (slope > v.max_positive_slope) v.max_positive_slope = slope;
    if (slope > opts.slope_tolerance && !v.first_violation_x) v.first_violation_x = curve[i].x;
  }
  v.identically_zero = std::all_of(curve.begin(), curve.end(),
                                   [](const CurvePoint& p) { return p.best_bound <= 0.0; });
  v.monotone = v.max_positive_slope <= opts.slope_tolerance && !v.identically_zero;
  return v;
}

bool has_interior_local_max(const std::vector<CurvePoint>& curve, double tol) {
  const std::size_t n = curve.size();
  if (n < 3) return false;
  std::vector<double> suffix_min(n);
  suffix_min[n - 1] = curve[n - 1].best_bound;
  for (std::size_t i = n - 1; i-- > 0;) {
    suffix_min[i] = std::min(suffix_min[i + 1], curve[i].best_bound);
  }
  double prefix_min = curve[0].best_bound;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double b = curve[i].best_bound;
    if (b > prefix_min + tol && b > suffix_min[i + 1] + tol) return true;
    prefix_min = std::min(prefix_min, b);
  }
  return false;
}

double mean_slope(const std::vector<CurvePoint>& curve) {
  if (curve.size() < 2) throw PreconditionError("mean_slope: need at least 2 points");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    sum += (curve[i + 1].best_bound - curve[i].best_bound) / (curve[i + 1].x - curve[i].x);
  }
  return sum / static_cast<double>(curve.size() - 1);
}

PhaseTransition find_pt_plain(int d, double c, double alpha_lo, double alpha_hi,
                              const QuadratureConfig& cfg, const FindPtOptions& opts) {
  if (!(alpha_lo > 0.0) || !(alpha_hi > alpha_lo)) {
    throw BracketError("find_pt: bracket must satisfy 0 < lo < hi");
  }
  if (!(opts.alpha_tol > 0.0)) throw PreconditionError("find_pt: alpha_tol must be > 0");
  RdtQuery::make(alpha_lo, d, c, 0.0);
  const double s = std::sqrt(c);
  const auto grid = uniform_grid(opts.x_min_frac * s, opts.x_max_frac * s, opts.points);
  const auto fq = f_q_grid(d, c, grid, cfg);
  MonotoneTestOptions mopts = opts.monotone;
  mopts.span = s;

  PhaseTransition pt;
  auto predicate = [&](double alpha) {
    std::vector<CurvePoint> curve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = std::sqrt(std::max(c - grid[i] * grid[i], 0.0));
      const double p = phi0_from_f_q(alpha, d, r, fq[i]);
      curve[i] = {grid[i], p, std::nullopt, p};
    }
    const bool ok = monotone_test(curve, mopts).monotone;
    pt.trace.emplace_back(alpha, ok);
    return ok;
  };

  double lo = alpha_lo, hi = alpha_hi;
  const bool at_lo = predicate(lo);
  const bool at_hi = predicate(hi);
  if (at_lo || !at_hi) {
    throw BracketError("find_pt: monotone_test must fail at the lower end and pass at the upper end");
  }
  while (hi - lo > opts.alpha_tol) {
    const double mid = 0.5 * (lo + hi);
    if (predicate(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  pt.alpha_star = 0.5 * (lo + hi);
  // Scan probes so a non-monotone predicate shows up in the sorted trace.
  for (int k = 1; k <= opts.scan_points; ++k) {
    predicate(alpha_lo + (alpha_hi - alpha_lo) * k / (opts.scan_points + 1));
  }

  auto sorted = pt.trace;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i].second && !sorted[i + 1].second) {
      throw NumericError("find_pt: monotone predicate is not monotone in alpha");
    }
  }
  return pt;
}

}  // namespace rdpr
