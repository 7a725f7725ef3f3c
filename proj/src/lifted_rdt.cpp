#include "rdpr/lifted_rdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rdpr/parallel.hpp"
#include "rdpr/specfun.hpp"

namespace rdpr {

std::string to_string(AlphaScaling s) { return s == AlphaScaling::per_dn ? "per_dn" : "as_printed"; }

AlphaScaling alpha_scaling_from_string(const std::string& s) {
  if (s == "per_dn") return AlphaScaling::per_dn;
  if (s == "as_printed") return AlphaScaling::as_printed;
  throw PreconditionError("unknown alpha scaling '" + s + "' (expected per_dn or as_printed)");
}

std::string to_string(SphericalTerm s) { return s == SphericalTerm::scaled ? "scaled" : "as_printed"; }

SphericalTerm spherical_term_from_string(const std::string& s) {
  if (s == "scaled") return SphericalTerm::scaled;
  if (s == "as_printed") return SphericalTerm::as_printed;
  throw PreconditionError("unknown spherical term '" + s + "' (expected scaled or as_printed)");
}

double gamma_hat_sph(double c3, double r, double r_y) {
  if (!(c3 > 0.0) || !(r >= 0.0) || !(r_y > 0.0)) {
    throw PreconditionError("gamma_hat_sph: need c3 > 0, r >= 0, r_y > 0");
  }
  const double a = c3 * r * r_y;
  return (a + std::sqrt(a * a + 4.0)) / 4.0;
}

LiftedSearchPoint LiftedSearchPoint::make(double c3, double r_y, double gamma, double r) {
  if (!(gamma > 0.0)) throw PreconditionError("LiftedSearchPoint: gamma must be > 0");
  const double gh = rdpr::gamma_hat_sph(c3, r, r_y);
  const double ry2 = r_y * r_y;
  return {c3, r_y, gamma, ry2 / (4.0 * gamma), ry2 / (ry2 + 4.0 * gamma), gh};
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw PreconditionError("log_grid: need 0 < lo <= hi, n >= 1");
  if (n == 1) return {lo};
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

namespace {

void check_positive_increasing(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw PreconditionError(std::string("LiftedSearchConfig: ") + name + " is empty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0) || !std::isfinite(g[i]) || (i > 0 && !(g[i] > g[i - 1]))) {
      throw PreconditionError(std::string("LiftedSearchConfig: ") + name +
                              " must be positive and increasing");
    }
  }
}

}  // namespace

void LiftedSearchConfig::validate() const {
  check_positive_increasing(c3_grid, "c3_grid");
  check_positive_increasing(r_y_grid, "r_y_grid");
  check_positive_increasing(gamma_grid, "gamma_grid");
  if (!(refine_shrink > 0.1 && refine_shrink < 0.9)) {
    throw PreconditionError("LiftedSearchConfig: refine_shrink must be in (0.1, 0.9)");
  }
  if (refine_rounds < 0) throw PreconditionError("LiftedSearchConfig: refine_rounds must be >= 0");
  if (refine_points < 2) throw PreconditionError("LiftedSearchConfig: refine_points must be >= 2");
}

LiftedSearchConfig LiftedSearchConfig::defaults() {
  LiftedSearchConfig s;
  s.c3_grid = log_grid(1e-3, 1e4, 24);
  s.r_y_grid = log_grid(1e-4, 1e2, 24);
  s.gamma_grid = log_grid(1e-6, 1e3, 24);
  return s;
}

namespace {

struct InnerDomain {
  double lo, hi;
  std::vector<double> breaks;
};

// y-range of the noncentral-chi mass, with breakpoints at the mode of the
// density and geometrically spaced around y = u / r, where exp(-kappa (u -
// r y)^2) peaks with width about 1 / (r sqrt(kappa)).
InnerDomain inner_domain(double u, double x, double r, int d, double radius, double kappa_max) {
  const double lambda = u * x / r;
  InnerDomain dom{std::max(0.0, lambda - radius), lambda + radius + std::sqrt(static_cast<double>(d)),
                  {lambda, u / r}};
  const double width = 1.0 / (r * std::sqrt(kappa_max));
  for (double w = 0.5 * width; w < radius; w *= 4.0) {
    dom.breaks.push_back(u / r - w);
    dom.breaks.push_back(u / r + w);
  }
  return dom;
}

}  // namespace

double f_q_lift(const RdtQuery& q, double c3, double gamma_x, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(c3 > 0.0)) throw PreconditionError("f_q_lift: c3 must be > 0");
  if (!(gamma_x > 0.0 && gamma_x <= 1.0)) throw PreconditionError("f_q_lift: gamma_x must be in (0, 1]");
  const double kappa = c3 * gamma_x;
  const int d = q.d;
  if (q.r == 0.0) return std::pow(1.0 + 2.0 * kappa * (1.0 - q.x) * (1.0 - q.x), -0.5 * d);
  const double upper = cfg.truncation_radius + std::sqrt(static_cast<double>(d));
  auto outer = [&](double u) {
    const double pu = chi_pdf(u, d);
    if (pu == 0.0) return 0.0;
    const double lambda = u * q.x / q.r;
    const InnerDomain dom = inner_domain(u, q.x, q.r, d, cfg.truncation_radius, kappa);
    auto inner = [&](double y) {
      const double e = u - q.r * y;
      return std::exp(-kappa * e * e) * noncentral_chi_pdf(y, d, lambda);
    };
    return pu * integrate_adaptive(inner, dom.lo, dom.hi, cfg, dom.breaks).value;
  };
  const double v = integrate_adaptive(outer, 0.0, upper, cfg).value;
  return std::clamp(v, std::numeric_limits<double>::min(), 1.0);
}

namespace {

constexpr double kProfileLo = -20.0;
constexpr double kProfileHi = 12.0;
constexpr int kProfileSegments = 5;
constexpr int kProfileNodes = 40;
constexpr double kSegmentWidth = (kProfileHi - kProfileLo) / kProfileSegments;

// Chebyshev-Lobatto node j of segment k, in log kappa.
double profile_node(int k, int j) {
  const double t = std::cos(std::numbers::pi * j / (kProfileNodes - 1));
  const double a = kProfileLo + k * kSegmentWidth;
  return a + 0.5 * kSegmentWidth * (1.0 - t);
}

}  // namespace

LiftedProfile::LiftedProfile(int d, double c, double x, const QuadratureConfig& cfg)
    : d_(d), c_(c), x_(x) {
  const RdtQuery q = RdtQuery::make(1.0, d, c, x);
  r_ = q.r;
  cfg.validate();
  if (r_ == 0.0) {
    closed_form_ = true;
    return;
  }
  const int total = kProfileSegments * kProfileNodes;
  Eigen::ArrayXd kappa(total);
  for (int k = 0; k < kProfileSegments; ++k) {
    for (int j = 0; j < kProfileNodes; ++j) kappa[k * kProfileNodes + j] = std::exp(profile_node(k, j));
  }
  // Component k holds 1 - F for small kappa and F otherwise, so each is
  // resolved to relative precision where it is small.
  const Eigen::Array<bool, Eigen::Dynamic, 1> use_g = kappa <= 1.0;

  QuadratureConfig inner_cfg = cfg;
  inner_cfg.abs_tol = 1e-250;
  inner_cfg.rel_tol = std::min(cfg.rel_tol, 1e-11);
  inner_cfg.max_subdivisions = std::max(cfg.max_subdivisions, 4000);
  QuadratureConfig outer_cfg = inner_cfg;
  outer_cfg.rel_tol = std::min(cfg.rel_tol, 1e-10);

  const double upper = cfg.truncation_radius + std::sqrt(static_cast<double>(d));
  Eigen::ArrayXd de(total);
  auto outer = [&](double u, Eigen::ArrayXd& out) {
    const double pu = chi_pdf(u, d);
    if (pu == 0.0) {
      out.setZero();
      return;
    }
    const double lambda = u * x / r_;
    const InnerDomain dom = inner_domain(u, x, r_, d, cfg.truncation_radius, kappa[total - 1]);
    auto inner = [&](double y, Eigen::ArrayXd& v) {
      const double p = noncentral_chi_pdf(y, d, lambda);
      const double e = u - r_ * y;
      de = -kappa * (e * e);
      for (int k = 0; k < total; ++k) {
        v[k] = p * (use_g[k] ? -std::expm1(de[k]) : std::exp(de[k]));
      }
    };
    out = pu * integrate_adaptive_vec(inner, dom.lo, dom.hi, total, inner_cfg, dom.breaks).value;
  };
  const Eigen::ArrayXd I = integrate_adaptive_vec(outer, 0.0, upper, total, outer_cfg).value;

  values_.resize(total);
  for (int k = 0; k < total; ++k) {
    const double neg_log_f = use_g[k] ? -std::log1p(-I[k]) : -std::log(I[k]);
    if (!(neg_log_f > 0.0) || !std::isfinite(neg_log_f)) {
      throw NumericError("LiftedProfile: expectation outside (0, 1) at kappa = " +
                         std::to_string(kappa[k]));
    }
    values_[k] = std::log(neg_log_f);
  }
  const double delta = 1e-4;
  hi_slope_ = (interp(kProfileHi) - interp(kProfileHi - delta)) / delta;
  lo_slope_ = 1.0;
}

double LiftedProfile::interp(double s) const {
  int k = static_cast<int>(std::floor((s - kProfileLo) / kSegmentWidth));
  k = std::clamp(k, 0, kProfileSegments - 1);
  const double a = kProfileLo + k * kSegmentWidth;
  const double t = 1.0 - 2.0 * (s - a) / kSegmentWidth;  // node order runs t = 1 .. -1
  const double* f = values_.data() + k * kProfileNodes;
  // Barycentric formula for Chebyshev-Lobatto points.
  double num = 0.0, den = 0.0;
  for (int j = 0; j < kProfileNodes; ++j) {
    const double tj = std::cos(std::numbers::pi * j / (kProfileNodes - 1));
    const double diff = t - tj;
    if (diff == 0.0) return f[j];
    double w = (j % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == kProfileNodes - 1) w *= 0.5;
    w /= diff;
    num += w * f[j];
    den += w;
  }
  return num / den;
}

double LiftedProfile::log_f(double kappa) const {
  if (!(kappa > 0.0)) throw PreconditionError("LiftedProfile: kappa must be > 0");
  if (closed_form_) {
    const double e = 1.0 - x_;
    return -0.5 * d_ * std::log1p(2.0 * kappa * e * e);
  }
  const double s = std::log(kappa);
  double h;
  if (s < kProfileLo) {
    h = interp(kProfileLo) + lo_slope_ * (s - kProfileLo);
  } else if (s > kProfileHi) {
    h = interp(kProfileHi) + hi_slope_ * (s - kProfileHi);
  } else {
    h = interp(s);
  }
  return -std::exp(h);
}

namespace {

double alpha_eff(const RdtQuery& q, AlphaScaling s) {
  return s == AlphaScaling::per_dn ? q.alpha / q.d : q.alpha;
}

// Terms of the objective that do not involve gamma.
double gamma_free_terms(double c3, double r, double r_y, SphericalTerm sph) {
  const double a = c3 * r * r_y;
  const double gh = (a + std::sqrt(a * a + 4.0)) / 4.0;
  const double sph_term = sph == SphericalTerm::scaled ? r * r_y * gh : gh;
  // log(1 - a / (2 gh)) = -2 asinh(a / 2).
  return 0.5 * c3 * r * r * r_y * r_y - sph_term - std::asinh(0.5 * a) / c3;
}

}  // namespace

double lifted_objective(const RdtQuery& q, const LiftedSearchPoint& p, const LiftedObjectiveOptions& opts,
                        const QuadratureConfig& cfg) {
  const double fl = f_q_lift(q, p.c3, p.gamma_x, cfg);
  return gamma_free_terms(p.c3, q.r, p.r_y, opts.spherical) + p.gamma -
         alpha_eff(q, opts.alpha_scaling) / p.c3 * std::log(fl);
}

double lifted_objective(const RdtQuery& q, const LiftedProfile& profile, const LiftedSearchPoint& p,
                        const LiftedObjectiveOptions& opts) {
  return gamma_free_terms(p.c3, q.r, p.r_y, opts.spherical) + p.gamma -
         alpha_eff(q, opts.alpha_scaling) / p.c3 * profile.log_f(p.c3 * p.gamma_x);
}

double plain_functional(const RdtQuery& q, double f_q_value, double r_y, double gamma, AlphaScaling scaling) {
  const double ry2 = r_y * r_y;
  const double gamma_x = ry2 / (ry2 + 4.0 * gamma);
  return gamma + alpha_eff(q, scaling) * gamma_x * f_q_value - q.r * r_y;
}

namespace {

double log_step(const std::vector<double>& g) {
  if (g.size() < 2) return std::log(10.0);
  return (std::log(g.back()) - std::log(g.front())) / static_cast<double>(g.size() - 1);
}

std::vector<double> window_offsets(int points) {
  std::vector<double> o(points);
  for (int i = 0; i < points; ++i) o[i] = -1.0 + 2.0 * i / (points - 1);
  return o;
}

class Searcher {
 public:
  Searcher(const RdtQuery& q, const LiftedProfile& profile, const LiftedSearchConfig& cfg, AlphaScaling scaling)
      : q_(q), profile_(profile), cfg_(cfg), a_eff_(alpha_eff(q, scaling)),
        offsets_(window_offsets(cfg.refine_points)), gamma_step_(log_step(cfg.gamma_grid)) {}

  // min over gamma of the gamma-dependent part; returns (value, argmin).
  std::pair<double, double> inner_min(double c3, double r_y) const {
    const double ry2 = r_y * r_y;
    auto g = [&](double gamma) {
      const double gamma_x = ry2 / (ry2 + 4.0 * gamma);
      return gamma - a_eff_ / c3 * profile_.log_f(c3 * gamma_x);
    };
    double best = -a_eff_ / c3 * profile_.log_f(c3);  // gamma -> 0 limit
    double best_gamma = 0.0;
    double center = cfg_.gamma_grid.front();
    double center_val = std::numeric_limits<double>::infinity();
    for (double gamma : cfg_.gamma_grid) {
      const double v = g(gamma);
      if (v < center_val) {
        center_val = v;
        center = gamma;
      }
    }
    double lc = std::log(center);
    double w = gamma_step_;
    for (int round = 0; round < cfg_.refine_rounds; ++round) {
      double next = lc;
      for (double o : offsets_) {
        const double ll = lc + w * o;
        const double v = g(std::exp(ll));
        if (v < center_val) {
          center_val = v;
          next = ll;
        }
      }
      lc = next;
      w *= cfg_.refine_shrink;
    }
    if (center_val < best) {
      best = center_val;
      best_gamma = std::exp(lc);
    }
    return {best, best_gamma};
  }

  LiftedBound run() const {
    auto cell = [&](double c3, double r_y) {
      const auto [v, gamma] = inner_min(c3, r_y);
      return LiftedBound{v + gamma_free_terms(c3, q_.r, r_y, cfg_.spherical), c3, r_y, gamma};
    };
    LiftedBound best{-std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0};
    for (double c3 : cfg_.c3_grid) {
      for (double r_y : cfg_.r_y_grid) {
        const LiftedBound b = cell(c3, r_y);
        if (b.value > best.value) best = b;
      }
    }
    double lc = std::log(best.c3), lr = std::log(best.r_y);
    double wc = log_step(cfg_.c3_grid), wr = log_step(cfg_.r_y_grid);
    for (int round = 0; round < cfg_.refine_rounds; ++round) {
      double nc = lc, nr = lr;
      for (double oc : offsets_) {
        for (double orr : offsets_) {
          const double tc = lc + wc * oc, tr = lr + wr * orr;
          const LiftedBound b = cell(std::exp(tc), std::exp(tr));
          if (b.value > best.value) {
            best = b;
            nc = tc;
            nr = tr;
          }
        }
      }
      lc = nc;
      lr = nr;
      wc *= cfg_.refine_shrink;
      wr *= cfg_.refine_shrink;
    }
    return best;
  }

 private:
  const RdtQuery& q_;
  const LiftedProfile& profile_;
  const LiftedSearchConfig& cfg_;
  double a_eff_;
  std::vector<double> offsets_;
  double gamma_step_;
};

void check_profile(const RdtQuery& q, const LiftedProfile& p) {
  if (p.d() != q.d || p.c() != q.c || p.x() != q.x) {
    throw PreconditionError("lifted: profile was built for a different (d, c, x)");
  }
}

}  // namespace

LiftedBound lifted_search(const RdtQuery& q, const LiftedProfile& profile, const LiftedSearchConfig& search,
                          AlphaScaling scaling) {
  search.validate();
  check_profile(q, profile);
  return Searcher(q, profile, search, scaling).run();
}

double phi0_lifted(const RdtQuery& q, const LiftedSearchConfig& search, AlphaScaling scaling,
                   const QuadratureConfig& cfg) {
  const LiftedProfile profile(q.d, q.c, q.x, cfg);
  return lifted_search(q, profile, search, scaling).value;
}

double best_lower_bound(const RdtQuery& q, const LiftedSearchConfig& search, AlphaScaling scaling,
                        const QuadratureConfig& cfg) {
  return std::max({0.0, phi0_plain(q, cfg), phi0_lifted(q, search, scaling, cfg)});
}

std::vector<LiftedProfile> build_profiles(int d, double c, const std::vector<double>& x_grid,
                                          const QuadratureConfig& cfg) {
  std::vector<std::optional<LiftedProfile>> slots(x_grid.size());
  parallel_for(x_grid.size(), default_thread_count(),
               [&](std::size_t i) { slots[i].emplace(d, c, x_grid[i], cfg); });
  std::vector<LiftedProfile> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<CurvePoint> curve_lifted(double alpha, int d, double c, const std::vector<double>& x_grid,
                                     const std::vector<LiftedProfile>& profiles,
                                     const LiftedSearchConfig& search, AlphaScaling scaling,
                                     const QuadratureConfig& cfg) {
  search.validate();
  if (profiles.size() != x_grid.size()) throw PreconditionError("curve_lifted: one profile per grid point");
  const auto base = curve_plain(alpha, d, c, x_grid, cfg);
  std::vector<CurvePoint> curve(base.size());
  parallel_for(base.size(), default_thread_count(), [&](std::size_t i) {
    const RdtQuery q = RdtQuery::make(alpha, d, c, x_grid[i]);
    const double lifted = lifted_search(q, profiles[i], search, scaling).value;
    curve[i] = base[i];
    curve[i].phi0_lifted = lifted;
    curve[i].best_bound = std::max({0.0, base[i].phi0_plain, lifted});
  });
  return curve;
}

std::vector<CurvePoint> curve_lifted(double alpha, int d, double c, const std::vector<double>& x_grid,
                                     const LiftedSearchConfig& search, AlphaScaling scaling,
                                     const QuadratureConfig& cfg) {
  RdtQuery::make(alpha, d, c, 0.0);
  return curve_lifted(alpha, d, c, x_grid, build_profiles(d, c, x_grid, cfg), search, scaling, cfg);
}

}  // namespace rdpr
