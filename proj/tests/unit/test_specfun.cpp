#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "rdpr/specfun.hpp"

using namespace rdpr;

namespace {

// Independent oracle: plain power series sum (t/2)^{2k+nu} / (k! (k+nu)!).
double bessel_series(int nu, double t) {
  double term = std::pow(t / 2.0, nu) / std::tgamma(nu + 1.0), sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= (t / 2.0) * (t / 2.0) / (k * static_cast<double>(k + nu));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

QuadratureConfig tight() {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-12;
  cfg.rel_tol = 1e-12;
  cfg.truncation_radius = 20.0;
  return cfg;
}

}  // namespace

TEST_CASE("bessel_i0 values") {
  CHECK(bessel_i0(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bessel_i0(1.0) == doctest::Approx(1.266066).epsilon(1e-6));
  CHECK(bessel_i0(5.0) == doctest::Approx(27.239872).epsilon(1e-7));
  CHECK_THROWS_AS(bessel_i0(std::nan("")), DomainError);
  CHECK_THROWS_AS(bessel_i0(INFINITY), DomainError);
}

TEST_CASE("bessel_i1 values") {
  CHECK(bessel_i1(0.0) == 0.0);
  CHECK(bessel_i1(1.0) == doctest::Approx(0.565159).epsilon(1e-6));
  CHECK(bessel_i1(2.0) == doctest::Approx(1.590637).epsilon(1e-6));
  CHECK_THROWS_AS(bessel_i1(std::nan("")), DomainError);
}

TEST_CASE("bessel against series and std::cyl_bessel_i") {
  for (double t : {1e-8, 0.01, 0.3, 1.0, 2.5, 7.0, 15.0, 29.0, 31.0, 45.0, 80.0, 300.0}) {
    CAPTURE(t);
    if (t < 40.0) {
      CHECK(std::fabs(bessel_i0(t) / bessel_series(0, t) - 1.0) < 1e-12);
      CHECK(std::fabs(bessel_i1(t) / bessel_series(1, t) - 1.0) < 1e-12);
    }
    CHECK(std::fabs(bessel_i0(t) / std::cyl_bessel_i(0.0, t) - 1.0) < 1e-12);
    CHECK(std::fabs(bessel_i1(t) / std::cyl_bessel_i(1.0, t) - 1.0) < 1e-12);
    CHECK(std::fabs(bessel_i0_scaled(t) / (std::exp(-t) * std::cyl_bessel_i(0.0, t)) - 1.0) < 1e-12);
  }
  CHECK(std::isfinite(bessel_i0_scaled(1e6)));
  CHECK(bessel_i0_scaled(1e6) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * 1e6)).epsilon(1e-6));
}

TEST_CASE("bessel_i0 is increasing") {
  double prev = bessel_i0(0.0);
  for (int k = 1; k <= 400; ++k) {
    const double v = bessel_i0(0.1 * k);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("fractional-order scaled bessel matches std") {
  for (double nu : {0.5, 1.5, 3.0}) {
    for (double t : {0.2, 3.0, 25.0, 60.0}) {
      CAPTURE(nu);
      CAPTURE(t);
      CHECK(std::fabs(bessel_i_scaled(nu, t) / (std::exp(-t) * std::cyl_bessel_i(nu, t)) - 1.0) < 1e-11);
    }
  }
  // I_{-1/2}(t) = sqrt(2 / (pi t)) cosh t
  for (double t : {0.2, 3.0, 25.0, 60.0}) {
    const double ref = std::sqrt(2.0 / (std::numbers::pi * t)) * 0.5 * (1.0 + std::exp(-2.0 * t));
    CAPTURE(t);
    CHECK(std::fabs(bessel_i_scaled(-0.5, t) / ref - 1.0) < 1e-11);
  }
}

TEST_CASE("log_gamma values") {
  CHECK(std::fabs(log_gamma(1.0)) < 1e-15);
  CHECK(log_gamma(0.5) == doctest::Approx(std::log(std::sqrt(std::numbers::pi))).epsilon(1e-13));
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-13));
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma(-1.5), DomainError);
}

TEST_CASE("chi_pdf values and normalization") {
  CHECK(chi_pdf(1.0, 2) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(chi_pdf(0.0, 1) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK_THROWS_AS(chi_pdf(-0.1, 2), DomainError);
  for (int d : {1, 2, 3, 8}) {
    CAPTURE(d);
    const double mass = integrate_semi_infinite([d](double u) { return chi_pdf(u, d); }, tight());
    CHECK(std::fabs(mass - 1.0) < 1e-10);
  }
}

TEST_CASE("noncentral_chi_pdf values") {
  for (double y : {0.0, 0.3, 1.0, 2.7}) {
    CHECK(noncentral_chi_pdf(y, 2, 0.0) == doctest::Approx(chi_pdf(y, 2)).epsilon(1e-14));
    CHECK(noncentral_chi_pdf(y, 3, 0.0) == doctest::Approx(chi_pdf(y, 3)).epsilon(1e-14));
  }
  CHECK(noncentral_chi_pdf(1.0, 2, 1.0) == doctest::Approx(std::exp(-1.0) * bessel_i0(1.0)).epsilon(1e-13));
  CHECK(noncentral_chi_pdf(1.0, 2, 1.0) == doctest::Approx(0.465760).epsilon(1e-6));
  CHECK_THROWS_AS(noncentral_chi_pdf(-1.0, 2, 1.0), DomainError);
  CHECK_THROWS_AS(noncentral_chi_pdf(1.0, 2, -1.0), DomainError);
}

TEST_CASE("noncentral_chi_pdf matches a Monte Carlo histogram") {
  // sqrt((1 + g1)^2 + g2^2): bin mass around y = 1 over width 0.1
  std::mt19937_64 gen(12345);
  std::normal_distribution<double> g;
  const int n = 1000000;
  int hits = 0;
  for (int k = 0; k < n; ++k) {
    const double a = 1.0 + g(gen), b = g(gen);
    const double y = std::hypot(a, b);
    hits += (y >= 0.95 && y < 1.05) ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / n;
  const double se = std::sqrt(p * (1 - p) / n);
  const double exact =
      integrate_adaptive([](double y) { return noncentral_chi_pdf(y, 2, 1.0); }, 0.95, 1.05, tight()).value;
  CHECK(std::fabs(p - exact) < 3.0 * se + 1e-12);
}

TEST_CASE("noncentral_chi_pdf normalization and nonnegativity") {
  for (int d : {1, 2, 3, 8}) {
    for (double lam : {0.0, 0.5, 1.5, 3.0}) {
      CAPTURE(d);
      CAPTURE(lam);
      QuadratureConfig cfg = tight();
      cfg.truncation_radius = 12.0 + lam;
      const double mass = integrate_semi_infinite([&](double y) { return noncentral_chi_pdf(y, d, lam); }, cfg);
      CHECK(std::fabs(mass - 1.0) < 1e-8);
      for (double y = 0.0; y < 10.0; y += 0.37) CHECK(noncentral_chi_pdf(y, d, lam) >= 0.0);
    }
  }
}

TEST_CASE("noncentral_chi_pdf is continuous at zero noncentrality") {
  for (int d : {1, 2, 3, 8}) {
    for (double y : {0.2, 1.0, 2.5}) {
      CHECK(std::fabs(noncentral_chi_pdf(y, d, 1e-6) - chi_pdf(y, d)) < 1e-5);
    }
  }
}

TEST_CASE("noncentral_chi_mean values") {
  CHECK(noncentral_chi_mean(2, 0.0) == doctest::Approx(std::sqrt(std::numbers::pi / 2)).epsilon(1e-14));
  CHECK(noncentral_chi_mean(1, 0.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK(noncentral_chi_mean(2, 2.0) == doctest::Approx(2.2723834280687425).epsilon(1e-12));
  CHECK(std::fabs(noncentral_chi_mean(2, 2.0) - 2.2726) < 1e-3);
}

TEST_CASE("d = 1 excess matches the folded normal") {
  const std::pair<double, double> ref[] = {{0.5, 0.39559311480261206},
                                           {2.5, 0.0040082743582563989},
                                           {6.0, 3.1271395919419329e-10},
                                           {9.0, 2.4495583617764538e-20}};
  for (const auto& [lam, ex] : ref) {
    CAPTURE(lam);
    CHECK(noncentral_chi_mean_excess(1, lam) == doctest::Approx(ex).epsilon(1e-10).scale(0.0));
  }
}

TEST_CASE("noncentral_chi_mean matches Monte Carlo at d = 2, lambda = 2") {
  std::mt19937_64 gen(777);
  std::normal_distribution<double> g;
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = std::hypot(2.0 + g(gen), g(gen));
    s += v;
    s2 += v * v;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::fabs(noncentral_chi_mean(2, 2.0) - mean) < 3.0 * se);
}

TEST_CASE("noncentral_chi_mean is increasing and obeys the Jensen bounds") {
  for (int d : {1, 2, 3, 5, 8}) {
    double prev = noncentral_chi_mean(d, 0.0);
    for (int k = 1; k <= 300; ++k) {
      const double lam = 0.1 * k;
      const double m = noncentral_chi_mean(d, lam);
      CAPTURE(d);
      CAPTURE(lam);
      CHECK(m > prev);
      CHECK(m >= lam);
      CHECK(m <= std::sqrt(lam * lam + d) * (1 + 1e-15));
      CHECK(noncentral_chi_mean_excess(d, lam) == doctest::Approx(m - lam).epsilon(1e-9));
      prev = m;
    }
  }
}

TEST_CASE("d = 2 closed form equals direct quadrature of the density") {
  for (double lam : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    QuadratureConfig cfg = tight();
    cfg.truncation_radius = 12.0 + lam;
    const double direct = integrate_semi_infinite([&](double y) { return y * noncentral_chi_pdf(y, 2, lam); }, cfg);
    CAPTURE(lam);
    CHECK(std::fabs(noncentral_chi_mean_d2(lam) - direct) < 1e-8);
    CHECK(std::fabs(noncentral_chi_mean_hypergeometric(2, lam) - noncentral_chi_mean_d2(lam)) < 1e-12);
  }
}

TEST_CASE("hypergeometric mean matches quadrature for odd d") {
  for (int d : {1, 3, 5}) {
    for (double lam : {0.3, 2.0, 7.5, 40.0}) {
      QuadratureConfig cfg = tight();
      cfg.truncation_radius = 12.0 + lam;
      const double direct =
          integrate_semi_infinite([&](double y) { return y * noncentral_chi_pdf(y, d, lam); }, cfg);
      CAPTURE(d);
      CAPTURE(lam);
      CHECK(noncentral_chi_mean(d, lam) == doctest::Approx(direct).epsilon(1e-9));
    }
  }
}

TEST_CASE("QuadratureVars invariants") {
  const auto q = QuadratureVars::from_mean(1.0, 2.0, 0.7, 2);
  CHECK(q.lambda_d == 0.7 * std::sqrt(2.0));
  CHECK(q.x_lambda == q.lambda_d * q.lambda_d / 2.0);
  const auto p = QuadratureVars::from_noncentrality(1.0, 2.0, 3.0, 3);
  CHECK(p.x_lambda == 4.5);
  CHECK(p.mu * std::sqrt(3.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(QuadratureVars::from_mean(-1.0, 0.0, 0.0, 2), DomainError);
}

TEST_CASE("integrate_semi_infinite chi-2 moments") {
  CHECK(std::fabs(integrate_semi_infinite([](double u) { return chi_pdf(u, 2); }, {}) - 1.0) < 1e-10);
  CHECK(std::fabs(integrate_semi_infinite([](double u) { return u * chi_pdf(u, 2); }, {}) -
                  std::sqrt(std::numbers::pi / 2)) < 1e-9);
  CHECK(std::fabs(integrate_semi_infinite([](double u) { return u * u * chi_pdf(u, 2); }, {}) - 2.0) < 1e-9);
}

TEST_CASE("adaptive quadrature reports failure with its best estimate") {
  QuadratureConfig cfg;
  cfg.max_subdivisions = 2;
  cfg.abs_tol = 1e-15;
  cfg.rel_tol = 1e-15;
  try {
    integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, cfg);
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    CHECK(e.estimate() > 1.0);
    CHECK(e.error_bound() > 0.0);
  }
}
