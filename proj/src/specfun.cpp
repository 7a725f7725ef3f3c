#include "rdpr/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace rdpr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lgamma_positive(double t) {
  int sign = 0;
  return ::lgamma_r(t, &sign);
}

void require_finite(double t, const char* what) {
  if (!std::isfinite(t)) throw DomainError(std::string(what) + ": argument must be finite");
}

// -(d/2 - 1) log 2 - log Gamma(d/2), the log of the chi normalizer.
double log_chi_normalizer(int d) {
  static const auto table = [] {
    std::array<double, 33> t{};
    for (int k = 1; k < 33; ++k) {
      t[k] = -(0.5 * k - 1.0) * std::numbers::ln2 - lgamma_positive(0.5 * k);
    }
    return t;
  }();
  if (d < static_cast<int>(table.size())) return table[d];
  return -(0.5 * d - 1.0) * std::numbers::ln2 - lgamma_positive(0.5 * d);
}

constexpr double kSeriesSwitch = 30.0;

double bessel_i_scaled_series(double nu, double t) {
  const double half = 0.5 * t;
  double term = std::exp(nu * std::log(half) - lgamma_positive(nu + 1.0) - t);
  double sum = term;
  const double q = half * half;
  for (int k = 0; k < 10000; ++k) {
    term *= q / ((k + 1.0) * (k + 1.0 + nu));
    sum += term;
    if (term < 1e-17 * sum && k > half) break;
  }
  return sum;
}

double bessel_i_scaled_asymptotic(double nu, double t) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * t);
    if (std::fabs(next) > std::fabs(term)) break;
    term = next;
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * t);
}

}  // namespace

QuadratureVars QuadratureVars::from_mean(double u, double y, double mu, int d) {
  if (d < 1) throw DomainError("QuadratureVars: d must be >= 1");
  if (u < 0.0 || y < 0.0 || mu < 0.0) throw DomainError("QuadratureVars: negative component");
  const double lambda = mu * std::sqrt(static_cast<double>(d));
  return {u, y, lambda, 0.5 * lambda * lambda, mu};
}

QuadratureVars QuadratureVars::from_noncentrality(double u, double y, double lambda_d, int d) {
  if (d < 1) throw DomainError("QuadratureVars: d must be >= 1");
  if (u < 0.0 || y < 0.0 || lambda_d < 0.0) {
    throw DomainError("QuadratureVars: negative component");
  }
  return {u, y, lambda_d, 0.5 * lambda_d * lambda_d, lambda_d / std::sqrt(static_cast<double>(d))};
}

double bessel_i_scaled(double nu, double t) {
  require_finite(t, "bessel_i_scaled");
  if (!(nu > -1.0) || !std::isfinite(nu)) throw DomainError("bessel_i_scaled: order must be > -1");
  if (t < 0.0) throw DomainError("bessel_i_scaled: argument must be nonnegative");
  if (t == 0.0) {
    if (nu == 0.0) return 1.0;
    return nu > 0.0 ? 0.0 : kInf;
  }
  if (t <= kSeriesSwitch + nu * nu) return bessel_i_scaled_series(nu, t);
  return bessel_i_scaled_asymptotic(nu, t);
}

double bessel_i0_scaled(double t) {
  require_finite(t, "bessel_i0");
  return bessel_i_scaled(0.0, std::fabs(t));
}

double bessel_i1_scaled(double t) {
  require_finite(t, "bessel_i1");
  const double v = bessel_i_scaled(1.0, std::fabs(t));
  return t < 0.0 ? -v : v;
}

double bessel_i0(double t) {
  const double s = bessel_i0_scaled(t);
  return s * std::exp(std::fabs(t));
}

double bessel_i1(double t) {
  const double s = bessel_i1_scaled(t);
  return s * std::exp(std::fabs(t));
}

double log_gamma(double t) {
  require_finite(t, "log_gamma");
  if (!(t > 0.0)) throw DomainError("log_gamma: argument must be positive");
  return lgamma_positive(t);
}

double chi_pdf(double u, int d) {
  require_finite(u, "chi_pdf");
  if (d < 1) throw DomainError("chi_pdf: d must be >= 1");
  if (u < 0.0) throw DomainError("chi_pdf: u must be nonnegative");
  if (u == 0.0) return d == 1 ? std::sqrt(2.0 / std::numbers::pi) : 0.0;
  if (d == 2) return u * std::exp(-0.5 * u * u);
  return std::exp((d - 1) * std::log(u) - 0.5 * u * u + log_chi_normalizer(d));
}

double noncentral_chi_pdf(double y, int d, double lambda_d) {
  require_finite(y, "noncentral_chi_pdf");
  require_finite(lambda_d, "noncentral_chi_pdf");
  if (d < 1) throw DomainError("noncentral_chi_pdf: d must be >= 1");
  if (y < 0.0 || lambda_d < 0.0) throw DomainError("noncentral_chi_pdf: negative argument");
  const double z = lambda_d * y;
  if (z < 1e-8) {
    return chi_pdf(y, d) * std::exp(-0.5 * lambda_d * lambda_d);
  }
  const double diff = y - lambda_d;
  const double half_d = 0.5 * d;
  double log_prefactor = -0.5 * diff * diff + half_d * std::log(y);
  if (d != 2) log_prefactor += (1.0 - half_d) * std::log(lambda_d);
  return std::exp(log_prefactor) * bessel_i_scaled(half_d - 1.0, z);
}

double noncentral_chi_mean_d2(double lambda_d) {
  require_finite(lambda_d, "noncentral_chi_mean");
  if (lambda_d < 0.0) throw DomainError("noncentral_chi_mean: lambda_d must be nonnegative");
  const double xl = 0.5 * lambda_d * lambda_d;
  const double h = 0.5 * xl;
  return std::sqrt(0.5 * std::numbers::pi) *
         ((xl + 1.0) * bessel_i0_scaled(h) + xl * bessel_i1_scaled(h));
}

namespace {

// Returns the mean when `excess` is false and mean - lambda_d otherwise.
double hypergeometric_mean(int d, double lambda_d, bool excess) {
  require_finite(lambda_d, "noncentral_chi_mean");
  if (d < 1) throw DomainError("noncentral_chi_mean: d must be >= 1");
  if (lambda_d < 0.0) throw DomainError("noncentral_chi_mean: lambda_d must be nonnegative");
  const double b = 0.5 * d;
  const double z = 0.5 * lambda_d * lambda_d;
  if (z <= 40.0) {
    // Kummer: 1F1(-1/2; b; -z) = e^{-z} 1F1(b + 1/2; b; z), all terms positive.
    double term = std::exp(-z);
    double sum = term;
    for (int n = 0; n < 100000; ++n) {
      term *= (b + 0.5 + n) / ((b + n) * (n + 1.0)) * z;
      sum += term;
      if (term < 1e-17 * sum && n > z) break;
    }
    const double prefactor =
        std::numbers::sqrt2 * std::exp(lgamma_positive(b + 0.5) - lgamma_positive(b));
    const double mean = prefactor * sum;
    return excess ? mean - lambda_d : mean;
  }
  // Large-z expansion; the Gamma prefactors cancel to lambda_d.
  const double a = -0.5;
  double term = 1.0, sum = 0.0;
  for (int s = 0; s < 200; ++s) {
    const double next = term * (a + s) * (a - b + 1.0 + s) / ((s + 1.0) * z);
    if (std::fabs(next) > std::fabs(term)) break;
    term = next;
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(1.0 + sum)) break;
  }
  return excess ? lambda_d * sum : lambda_d * (1.0 + sum);
}

// d = 1: E|lambda + g| - lambda = 2 (phi(lambda) - lambda Q(lambda)). Above 2 the
// bracket is phi * K / (lambda + K) with K from the Mills-ratio continued fraction.
double folded_normal_excess(double lambda_d) {
  require_finite(lambda_d, "noncentral_chi_mean");
  if (lambda_d < 0.0) throw DomainError("noncentral_chi_mean: lambda_d must be nonnegative");
  const double phi = std::exp(-0.5 * lambda_d * lambda_d) / std::sqrt(2.0 * std::numbers::pi);
  if (lambda_d < 2.0) return 2.0 * phi - lambda_d * std::erfc(lambda_d / std::numbers::sqrt2);
  double tail = 0.0;
  for (int k = 400; k >= 2; --k) tail = k / (lambda_d + tail);
  const double K = 1.0 / (lambda_d + tail);
  return 2.0 * phi * K / (lambda_d + K);
}

}  // namespace

double noncentral_chi_mean_hypergeometric(int d, double lambda_d) {
  return hypergeometric_mean(d, lambda_d, false);
}

double noncentral_chi_mean_excess(int d, double lambda_d) {
  if (d == 1) return folded_normal_excess(lambda_d);
  return hypergeometric_mean(d, lambda_d, true);
}

double noncentral_chi_mean(int d, double lambda_d) {
  if (d == 2) return noncentral_chi_mean_d2(lambda_d);
  if (d == 1) return lambda_d + folded_normal_excess(lambda_d);
  return noncentral_chi_mean_hypergeometric(d, lambda_d);
}

}  // namespace rdpr
