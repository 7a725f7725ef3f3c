#pragma once

// Plain RDT lower bound phi0(c, x) and the monotonicity-based phase
// transition finder.

#include <optional>
#include <utility>
#include <vector>

#include "rdpr/errors.hpp"
#include "rdpr/quadrature.hpp"

namespace rdpr {

struct RdtQuery {
  double alpha = 1.0;
  int d = 2;
  double c = 1.0;
  double x = 0.0;
  double r = 1.0;  // sqrt(c - x^2)

  /// Validates and fills r. x may equal sqrt(c) up to rounding.
  static RdtQuery make(double alpha, int d, double c, double x);
};

struct CurvePoint {
  double x = 0.0;
  double phi0_plain = 0.0;
  std::optional<double> phi0_lifted;
  double best_bound = 0.0;
};

struct MonotonicityVerdict {
  /// False for an identically zero curve, which certifies nothing.
  bool monotone = true;
  bool identically_zero = false;
  std::optional<double> first_violation_x;
  double max_positive_slope = 0.0;
};

struct MonotoneTestOptions {
  double slope_tolerance = 1e-6;
  int min_points = 50;
  /// Curve extent the grid must cover: x_min <= 0.01 * span, x_max >= 0.99 * span.
  double span = 1.0;
};

/// d(1+c) - 2r * int_0^inf E||x u/r e + g|| u chi_d(u) du. The analytic value
/// d(1-x)^2 is returned at r = 0.
double f_q(const RdtQuery& query, const QuadratureConfig& cfg = {});

/// d = 2 evaluation through the I0/I1 closed form of the noncentral-chi mean.
double f_q_d2_closed(double c, double x, const QuadratureConfig& cfg = {});

/// max(sqrt(alpha/d * f_q) - r, 0)^2 for a precomputed f_q.
double phi0_from_f_q(double alpha, int d, double r, double fq);

double phi0_plain(const RdtQuery& query, const QuadratureConfig& cfg = {});

/// n uniform points on [lo, hi], endpoints included.
std::vector<double> uniform_grid(double lo, double hi, int n);

std::vector<CurvePoint> curve_plain(double alpha, int d, double c, const std::vector<double>& x_grid,
                                    const QuadratureConfig& cfg = {});

/// f_q along a grid; independent of alpha, so curves at several alpha can share it.
std::vector<double> f_q_grid(int d, double c, const std::vector<double>& x_grid,
                             const QuadratureConfig& cfg = {});

MonotonicityVerdict monotone_test(const std::vector<CurvePoint>& curve,
                                  const MonotoneTestOptions& opts = {});

/// True when some point's best_bound exceeds the minimum to its left and the
/// minimum to its right by more than tol, i.e. the curve rises then falls.
bool has_interior_local_max(const std::vector<CurvePoint>& curve, double tol = 1e-9);

/// Mean forward-difference slope of best_bound across the curve.
double mean_slope(const std::vector<CurvePoint>& curve);

struct FindPtOptions {
  int points = 500;
  double alpha_tol = 0.005;
  double x_min_frac = 0.005;  // grid covers [x_min_frac, x_max_frac] * sqrt(c)
  double x_max_frac = 0.995;
  /// Extra uniformly spaced predicate probes inside the bracket.
  int scan_points = 16;
  MonotoneTestOptions monotone;
};

struct PhaseTransition {
  double alpha_star = 0.0;
  /// Every predicate evaluation in order: (alpha, monotone).
  std::vector<std::pair<double, bool>> trace;
};

/// Bisection on alpha for the monotone_test predicate. Throws BracketError
/// when both ends agree and NumericError when the trace is not a single
/// fail-to-pass switch.
PhaseTransition find_pt_plain(int d, double c, double alpha_lo, double alpha_hi,
                              const QuadratureConfig& cfg = {}, const FindPtOptions& opts = {});

}  // namespace rdpr
