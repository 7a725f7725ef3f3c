#pragma once

// Special functions and chi-family densities used by the bound integrals.
// All functions are pure and thread-safe.

#include "rdpr/errors.hpp"
#include "rdpr/quadrature.hpp"

namespace rdpr {

/// Scalar integration variables of the chi / noncentral-chi reduction.
struct QuadratureVars {
  double u = 0.0;         // chi magnitude, d degrees of freedom
  double y = 0.0;         // noncentral-chi magnitude
  double lambda_d = 0.0;  // noncentrality
  double x_lambda = 0.0;  // lambda_d^2 / 2
  double mu = 0.0;        // per-coordinate mean, lambda_d = mu * sqrt(d)

  static QuadratureVars from_mean(double u, double y, double mu, int d);
  static QuadratureVars from_noncentrality(double u, double y, double lambda_d, int d);
};

/// e^{-t} I_nu(t) for t >= 0 and nu > -1.
double bessel_i_scaled(double nu, double t);

double bessel_i0(double t);
double bessel_i1(double t);
/// e^{-t} I_0(t); finite for all t >= 0.
double bessel_i0_scaled(double t);
/// e^{-t} I_1(t).
double bessel_i1_scaled(double t);

double log_gamma(double t);

/// Chi density with d degrees of freedom.
double chi_pdf(double u, int d);

/// Noncentral chi density with d degrees of freedom and noncentrality
/// lambda_d. Falls back to the central limit when lambda_d * y < 1e-8.
double noncentral_chi_pdf(double y, int d, double lambda_d);

/// E || mu + g || for g ~ N(0, I_d) with || mu || = lambda_d.
/// Uses the Bessel closed form for d = 2 and the hypergeometric series
/// otherwise.
double noncentral_chi_mean(int d, double lambda_d);

/// d = 2 closed form: sqrt(pi/2) ((xl+1) I0(xl/2) + xl I1(xl/2)) e^{-xl/2},
/// xl = lambda_d^2 / 2.
double noncentral_chi_mean_d2(double lambda_d);

/// sqrt(2) Gamma((d+1)/2) / Gamma(d/2) * 1F1(-1/2; d/2; -lambda_d^2/2),
/// valid for every d.
double noncentral_chi_mean_hypergeometric(int d, double lambda_d);

/// noncentral_chi_mean(d, lambda_d) - lambda_d, computed without cancellation
/// for large lambda_d. Hypergeometric route for every d.
double noncentral_chi_mean_excess(int d, double lambda_d);

}  // namespace rdpr
