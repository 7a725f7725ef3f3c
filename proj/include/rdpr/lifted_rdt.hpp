#pragma once

// Partially lifted RDT bound: double-quadrature expectation, the scalar
// objective in (c3, r_y, gamma), and its max-min search.

#include <optional>
#include <string>
#include <vector>

#include "rdpr/plain_rdt.hpp"

namespace rdpr {

enum class AlphaScaling { per_dn, as_printed };

/// Coefficient of gamma_hat_sph in the spherical term. `scaled` multiplies
/// it by r * r_y, which makes the c3 -> 0 limit equal the plain functional
/// and the (c, x) = (1, 1) value equal gamma. `as_printed` uses the bare
/// gamma_hat_sph.
enum class SphericalTerm { scaled, as_printed };

std::string to_string(AlphaScaling s);
AlphaScaling alpha_scaling_from_string(const std::string& s);
std::string to_string(SphericalTerm s);
SphericalTerm spherical_term_from_string(const std::string& s);

double gamma_hat_sph(double c3, double r, double r_y);

struct LiftedSearchPoint {
  double c3 = 1.0;
  double r_y = 1.0;
  double gamma = 1.0;
  double r_y_bar = 0.25;
  double gamma_x = 0.2;
  double gamma_hat_sph = 0.5;

  static LiftedSearchPoint make(double c3, double r_y, double gamma, double r);
};

struct LiftedSearchConfig {
  std::vector<double> c3_grid;
  std::vector<double> r_y_grid;
  std::vector<double> gamma_grid;
  int refine_rounds = 24;
  double refine_shrink = 0.5;
  int refine_points = 5;
  SphericalTerm spherical = SphericalTerm::scaled;

  void validate() const;
  static LiftedSearchConfig defaults();
};

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

/// E exp(-c3 gamma_x (u - r y)^2), u ~ chi_d, y ~ noncentral chi_d(u x / r),
/// by iterated adaptive quadrature.
double f_q_lift(const RdtQuery& query, double c3, double gamma_x, const QuadratureConfig& cfg = {});

/// Tabulated kappa -> log E exp(-kappa (u - r y)^2) at fixed (c, x, d).
/// The table stores log(-log F) on a piecewise Chebyshev grid in log kappa.
class LiftedProfile {
 public:
  LiftedProfile(int d, double c, double x, const QuadratureConfig& cfg = {});

  /// log F(kappa) for kappa > 0; always <= 0.
  double log_f(double kappa) const;

  int d() const { return d_; }
  double c() const { return c_; }
  double x() const { return x_; }
  double r() const { return r_; }

 private:
  double interp(double s) const;

  int d_;
  double c_, x_, r_;
  bool closed_form_ = false;
  std::vector<double> values_;  // log(-log F) at the nodes, segment-major
  double lo_slope_ = 1.0, hi_slope_ = 0.0;
};

struct LiftedObjectiveOptions {
  AlphaScaling alpha_scaling = AlphaScaling::per_dn;
  SphericalTerm spherical = SphericalTerm::scaled;
};

/// Objective at a point, evaluating f_q_lift by direct quadrature.
double lifted_objective(const RdtQuery& query, const LiftedSearchPoint& point,
                        const LiftedObjectiveOptions& opts = {}, const QuadratureConfig& cfg = {});

/// Objective at a point through a profile built for the same (d, c, x).
double lifted_objective(const RdtQuery& query, const LiftedProfile& profile,
                        const LiftedSearchPoint& point, const LiftedObjectiveOptions& opts = {});

/// gamma + alpha_eff * gamma_x * f_q - r * r_y: the c3 -> 0 limit of the objective.
double plain_functional(const RdtQuery& query, double f_q_value, double r_y, double gamma,
                        AlphaScaling scaling = AlphaScaling::per_dn);

struct LiftedBound {
  double value = 0.0;
  double c3 = 0.0;
  double r_y = 0.0;
  /// Inner minimizer; 0 when the gamma -> 0 limit attains the minimum.
  double gamma = 0.0;
};

/// max over (c3, r_y) of min over gamma, with local grid refinement.
LiftedBound lifted_search(const RdtQuery& query, const LiftedProfile& profile,
                          const LiftedSearchConfig& search, AlphaScaling scaling = AlphaScaling::per_dn);

double phi0_lifted(const RdtQuery& query, const LiftedSearchConfig& search,
                   AlphaScaling scaling = AlphaScaling::per_dn, const QuadratureConfig& cfg = {});

/// max(0, phi0_plain, phi0_lifted).
double best_lower_bound(const RdtQuery& query, const LiftedSearchConfig& search,
                        AlphaScaling scaling = AlphaScaling::per_dn, const QuadratureConfig& cfg = {});

/// One profile per grid point, built in parallel.
std::vector<LiftedProfile> build_profiles(int d, double c, const std::vector<double>& x_grid,
                                          const QuadratureConfig& cfg = {});

/// Curve with plain, lifted and best columns; profiles must match x_grid.
std::vector<CurvePoint> curve_lifted(double alpha, int d, double c, const std::vector<double>& x_grid,
                                     const std::vector<LiftedProfile>& profiles,
                                     const LiftedSearchConfig& search,
                                     AlphaScaling scaling = AlphaScaling::per_dn,
                                     const QuadratureConfig& cfg = {});

std::vector<CurvePoint> curve_lifted(double alpha, int d, double c, const std::vector<double>& x_grid,
                                     const LiftedSearchConfig& search,
                                     AlphaScaling scaling = AlphaScaling::per_dn,
                                     const QuadratureConfig& cfg = {});

}  // namespace rdpr
