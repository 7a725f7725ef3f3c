#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "rdpr/experiments.hpp"
#include "rdpr/lifted_rdt.hpp"
#include "rdpr/plain_rdt.hpp"
#include "rdpr/solver.hpp"
#include "rdpr/version.hpp"

namespace rdpr::cli {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string comment_line(const std::string& command, const json& params) {
  return "# rdpr " + std::string(kVersion) + " " + command + " " + params.dump() + "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw PreconditionError(path + ": " + e.what());
  }
}

/// Destination for results: the --out file, opened before any computation,
/// or the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {
    if (!path_.empty()) {
      file_.open(path_, std::ios::out | std::ios::trunc);
      if (!file_) throw PreconditionError("cannot write " + path_);
    }
  }
  void write(const std::string& text) {
    std::ostream& os = path_.empty() ? fallback_ : file_;
    os << text;
    os.flush();
    if (!os) throw PreconditionError("write failed for " + (path_.empty() ? std::string("output") : path_));
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ofstream file_;
};

std::string curve_csv(const std::vector<CurvePoint>& curve, bool lifted) {
  std::ostringstream os;
  os << (lifted ? "x,phi0_plain,phi0_lifted,best_bound\n" : "x,phi0_plain,best_bound\n");
  for (const auto& p : curve) {
    os << num(p.x) << ',' << num(p.phi0_plain) << ',';
    if (lifted) os << (p.phi0_lifted ? num(*p.phi0_lifted) : std::string()) << ',';
    os << num(p.best_bound) << '\n';
  }
  return os.str();
}

void report_shape(const std::vector<CurvePoint>& curve, double span, std::ostream& err) {
  MonotoneTestOptions mo;
  mo.span = span;
  try {
    const MonotonicityVerdict v = monotone_test(curve, mo);
    err << "monotone=" << (v.monotone ? "true" : "false") << " max_positive_slope=" << num(v.max_positive_slope);
    if (v.identically_zero) err << " identically_zero=true";
    err << " interior_local_max=" << (has_interior_local_max(curve) ? "true" : "false") << '\n';
  } catch (const PreconditionError&) {
    // grid too short or too narrow for a verdict
  }
}

struct CurveArgs {
  double alpha = 2.79;
  int d = 2;
  double c = 1.0;
  std::optional<double> x_min, x_max;
  int points = 200;
  std::string out;

  void add(CLI::App* sub) {
    sub->add_option("--alpha", alpha, "sample complexity ratio m/n")->capture_default_str();
    sub->add_option("--d", d, "measurement rank")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--c", c, "squared norm of the candidate")->capture_default_str();
    sub->add_option("--x-min", x_min, "first grid point (default 0.005*sqrt(c))");
    sub->add_option("--x-max", x_max, "last grid point (default 0.995*sqrt(c))");
    sub->add_option("--points", points, "number of grid points")->capture_default_str();
    sub->add_option("--out", out, "output CSV path (default stdout)");
  }

  std::vector<double> grid() const {
    if (!(alpha > 0.0)) throw PreconditionError("--alpha must be > 0");
    if (!(c > 0.0)) throw PreconditionError("--c must be > 0");
    if (points < 2) throw PreconditionError("--points must be >= 2");
    const double lo = x_min.value_or(0.005 * std::sqrt(c));
    const double hi = x_max.value_or(0.995 * std::sqrt(c));
    if (!(lo >= 0.0 && lo < hi && hi <= std::sqrt(c))) {
      throw PreconditionError("need 0 <= --x-min < --x-max <= sqrt(c)");
    }
    return uniform_grid(lo, hi, points);
  }

  json params() const {
    const std::vector<double> g = grid();
    return {{"alpha", alpha}, {"d", d}, {"c", c}, {"x_min", g.front()}, {"x_max", g.back()}, {"points", points}};
  }
};

struct LiftedArgs {
  CurveArgs curve;
  std::vector<double> c3{1e-3, 1e4, 24}, r_y{1e-4, 1e2, 24}, gamma{1e-6, 1e3, 24};
  int refine_rounds = 24;
  double refine_shrink = 0.5;
  int refine_points = 5;
  std::string alpha_scaling = "per_dn";
  std::string spherical = "scaled";

  void add(CLI::App* sub) {
    curve.points = 100;
    curve.alpha = 2.5;
    curve.add(sub);
    sub->add_option("--c3-grid", c3, "lo hi n")->expected(3)->capture_default_str();
    sub->add_option("--ry-grid", r_y, "lo hi n")->expected(3)->capture_default_str();
    sub->add_option("--gamma-grid", gamma, "lo hi n")->expected(3)->capture_default_str();
    sub->add_option("--refine-rounds", refine_rounds)->capture_default_str();
    sub->add_option("--refine-shrink", refine_shrink)->capture_default_str();
    sub->add_option("--refine-points", refine_points)->capture_default_str();
    sub->add_option("--alpha-scaling", alpha_scaling, "per_dn or as_printed")
        ->check(CLI::IsMember({"per_dn", "as_printed"}))
        ->capture_default_str();
    sub->add_option("--spherical", spherical, "scaled or as_printed")
        ->check(CLI::IsMember({"scaled", "as_printed"}))
        ->capture_default_str();
  }

  static std::vector<double> grid_of(const std::vector<double>& spec, const char* name) {
    const double n = spec[2];
    if (!(spec[0] > 0.0 && spec[1] >= spec[0]) || n < 1 || n != std::floor(n)) {
      throw PreconditionError(std::string("--") + name + ": need 0 < lo <= hi and integer n >= 1");
    }
    return log_grid(spec[0], spec[1], static_cast<int>(n));
  }

  LiftedSearchConfig search() const {
    LiftedSearchConfig s;
    s.c3_grid = grid_of(c3, "c3-grid");
    s.r_y_grid = grid_of(r_y, "ry-grid");
    s.gamma_grid = grid_of(gamma, "gamma-grid");
    s.refine_rounds = refine_rounds;
    s.refine_shrink = refine_shrink;
    s.refine_points = refine_points;
    s.spherical = spherical_term_from_string(spherical);
    s.validate();
    return s;
  }

  json params() const {
    json p = curve.params();
    p["c3_grid"] = c3;
    p["ry_grid"] = r_y;
    p["gamma_grid"] = gamma;
    p["refine_rounds"] = refine_rounds;
    p["refine_shrink"] = refine_shrink;
    p["refine_points"] = refine_points;
    p["alpha_scaling"] = alpha_scaling;
    p["spherical"] = spherical;
    return p;
  }
};

struct FindPtArgs {
  int d = 2;
  double c = 1.0;
  std::string mode = "plain";
  std::vector<double> bracket{2.0, 3.5};
  int points = 500;
  double alpha_tol = 0.005;
  double margin = 0.15;
  std::string out;

  void add(CLI::App* sub) {
    sub->add_option("--d", d)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--c", c)->capture_default_str();
    sub->add_option("--mode", mode, "only plain is supported")->capture_default_str();
    sub->add_option("--bracket", bracket, "alpha_lo alpha_hi")->expected(2)->capture_default_str();
    sub->add_option("--points", points, "grid points per predicate evaluation")->capture_default_str();
    sub->add_option("--alpha-tol", alpha_tol)->capture_default_str();
    sub->add_option("--margin", margin, "safer-compression margin")->capture_default_str();
    sub->add_option("--out", out, "output JSON path (default stdout)");
  }
};

struct SolveArgs {
  int n = 0, m = 0, d = 2;
  std::uint64_t seed = 0;
  std::string init = "spectral";
  std::string x0_file, config_file, out;
  bool trace = false;

  void add(CLI::App* sub) {
    sub->add_option("--n", n)->required()->check(CLI::PositiveNumber);
    sub->add_option("--m", m)->required()->check(CLI::PositiveNumber);
    sub->add_option("--d", d)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed)->required();
    sub->add_option("--init", init, "spectral, planted or file")
        ->check(CLI::IsMember({"spectral", "planted", "file"}))
        ->capture_default_str();
    sub->add_option("--x0", x0_file, "JSON array (or {\"x0\": [...]}) used with --init file");
    sub->add_option("--config", config_file, "JSON solver settings");
    sub->add_flag("--trace", trace, "record per-stage diagnostics");
    sub->add_option("--out", out, "output JSON path (default stdout)");
  }
};

struct SimulateArgs {
  std::string manifest, out, sidecar, config_file;
  std::optional<int> n, d, trials;
  std::optional<std::uint64_t> base_seed;
  std::vector<double> alphas;
  unsigned threads = 0;
  bool timing = false;

  void add(CLI::App* sub) {
    sub->add_option("--manifest", manifest, "JSON manifest; inline flags override its fields");
    sub->add_option("--n", n);
    sub->add_option("--d", d);
    sub->add_option("--alphas", alphas, "alpha grid")->delimiter(',');
    sub->add_option("--trials", trials, "trials per alpha");
    sub->add_option("--base-seed", base_seed);
    sub->add_option("--config", config_file, "JSON solver settings");
    sub->add_option("--threads", threads, "worker threads (default RDPR_THREADS or all cores)");
    sub->add_flag("--timing", timing, "record per-row wall time in the sidecar");
    sub->add_option("--out", out, "output CSV path (default stdout)");
    sub->add_option("--sidecar", sidecar, "sidecar JSON path (default <out>.manifest.json)");
  }
};

int cmd_plain_curve(const CurveArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<double> grid = a.grid();
  const json params = a.params();
  Sink sink(a.out, out);
  const auto curve = curve_plain(a.alpha, a.d, a.c, grid);
  sink.write(comment_line("plain-curve", params) + curve_csv(curve, false));
  report_shape(curve, std::sqrt(a.c), err);
  return kExitOk;
}

int cmd_lifted_curve(const LiftedArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<double> grid = a.curve.grid();
  const LiftedSearchConfig search = a.search();
  const AlphaScaling scaling = alpha_scaling_from_string(a.alpha_scaling);
  const json params = a.params();
  Sink sink(a.curve.out, out);
  const auto curve = curve_lifted(a.curve.alpha, a.curve.d, a.curve.c, grid, search, scaling);
  sink.write(comment_line("lifted-curve", params) + curve_csv(curve, true));
  report_shape(curve, std::sqrt(a.curve.c), err);
  return kExitOk;
}

int cmd_find_pt(const FindPtArgs& a, std::ostream& out, std::ostream& err) {
  if (a.mode != "plain") throw PreconditionError("--mode: only plain is supported");
  if (!(a.c > 0.0)) throw PreconditionError("--c must be > 0");
  if (!(a.bracket[0] > 0.0 && a.bracket[1] > a.bracket[0])) {
    throw BracketError("--bracket: need 0 < alpha_lo < alpha_hi");
  }
  if (!(a.margin >= 0.0 && a.margin <= 0.5)) throw PreconditionError("--margin must be in [0, 0.5]");
  FindPtOptions opts;
  opts.points = a.points;
  opts.alpha_tol = a.alpha_tol;
  const json params{{"d", a.d},           {"c", a.c},         {"mode", a.mode}, {"bracket", a.bracket},
                    {"points", a.points}, {"alpha_tol", a.alpha_tol}, {"margin", a.margin}};
  Sink sink(a.out, out);
  const PhaseTransition pt = find_pt_plain(a.d, a.c, a.bracket[0], a.bracket[1], {}, opts);
  json trace = json::array();
  for (const auto& [alpha, pass] : pt.trace) trace.push_back({{"alpha", alpha}, {"monotone", pass}});
  const json report{{"meta", {{"tool", "rdpr"}, {"version", kVersion}, {"command", "find-pt"}, {"params", params}}},
                    {"alpha_star", pt.alpha_star},
                    {"safer_compression", safer_compression(pt.alpha_star, a.margin)},
                    {"trace", trace}};
  sink.write(report.dump(2) + "\n");
  err << "alpha_star=" << num(pt.alpha_star) << " safer_compression=" << num(safer_compression(pt.alpha_star, a.margin))
      << '\n';
  return kExitOk;
}

Eigen::VectorXd read_x0(const std::string& path) {
  const json j = read_json_file(path);
  try {
    const auto v = (j.is_object() ? j.at("x0") : j).get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } catch (const json::exception& e) {
    throw PreconditionError(path + ": " + e.what());
  }
}

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream&) {
  SolverConfig cfg = a.config_file.empty() ? SolverConfig{} : solver_config_from_json(read_json_file(a.config_file));
  cfg.record_trace = a.trace;
  cfg.validate();
  std::optional<Eigen::VectorXd> x0;
  if (a.init == "file") {
    if (a.x0_file.empty()) throw PreconditionError("--init file requires --x0");
    x0 = read_x0(a.x0_file);
    if (x0->size() != static_cast<Eigen::Index>(a.d) * a.n) throw PreconditionError("--x0 must have length d*n");
  }
  const json params{{"n", a.n},       {"m", a.m},         {"d", a.d},          {"seed", a.seed},
                    {"init", a.init}, {"trace", a.trace}, {"solver", to_json(cfg)}};
  Sink sink(a.out, out);
  const MeasurementInstance inst = generate_instance(a.n, a.m, a.d, a.seed);
  if (a.init == "planted") x0 = cfg.init_norm * inst.x_true;
  const SolverResult res = gradbar(inst, cfg, x0);
  json j = to_json(res);
  j["success"] = is_success(res, cfg.success_overlap);
  j["meta"] = {{"tool", "rdpr"}, {"version", kVersion}, {"command", "solve"}, {"params", params}};
  sink.write(j.dump(2) + "\n");
  return kExitOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentManifest m =
      a.manifest.empty() ? ExperimentManifest::sweep_default() : manifest_from_json(read_json_file(a.manifest));
  if (a.n) m.n = *a.n;
  if (a.d) m.d = *a.d;
  if (a.trials) m.trials_per_alpha = *a.trials;
  if (a.base_seed) m.base_seed = *a.base_seed;
  if (!a.alphas.empty()) m.alpha_grid = a.alphas;
  if (!a.config_file.empty()) m.solver_cfg = solver_config_from_json(read_json_file(a.config_file));
  if (m.artifact_version.empty()) m.artifact_version = kVersion;
  m.validate();

  std::string sidecar_path = a.sidecar;
  if (sidecar_path.empty() && !a.out.empty()) sidecar_path = a.out + ".manifest.json";
  Sink sink(a.out, out);
  std::optional<Sink> side;
  if (!sidecar_path.empty()) side.emplace(sidecar_path, err);

  SweepOptions so;
  so.threads = a.threads;
  so.timing = a.timing;
  const ExperimentResult res = pt_sweep(m, so);
  ExperimentResult table = res;
  for (auto& row : table.rows) row.wall_time_s.reset();
  const std::string csv = result_to_csv(table, m);
  sink.write(csv);
  if (side) side->write(sweep_sidecar(res, m, csv).dump(2) + "\n");
  if (res.crossing_estimate) {
    err << "crossing_estimate=" << num(*res.crossing_estimate)
        << " safer_compression=" << num(safer_compression(*res.crossing_estimate)) << '\n';
  } else {
    err << "crossing_estimate=none\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plain and lifted RDT bounds for rank-d phase retrieval, and the gradbar solver", "rdpr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CurveArgs plain;
  plain.add(app.add_subcommand("plain-curve", "plain bound phi0 along x"));
  LiftedArgs lifted;
  lifted.add(app.add_subcommand("lifted-curve", "plain, lifted and best bounds along x"));
  FindPtArgs findpt;
  findpt.add(app.add_subcommand("find-pt", "bisect alpha for the monotone plain curve"));
  SolveArgs solve;
  solve.add(app.add_subcommand("solve", "run gradbar on one random instance"));
  SimulateArgs sim;
  sim.add(app.add_subcommand("simulate", "success-rate sweep over alpha"));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("plain-curve")) return cmd_plain_curve(plain, out, err);
    if (app.got_subcommand("lifted-curve")) return cmd_lifted_curve(lifted, out, err);
    if (app.got_subcommand("find-pt")) return cmd_find_pt(findpt, out, err);
    if (app.got_subcommand("solve")) return cmd_solve(solve, out, err);
    if (app.got_subcommand("simulate")) return cmd_simulate(sim, out, err);
  } catch (const std::invalid_argument& e) {  // PreconditionError, BracketError
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {  // NumericError and friends
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  err << "usage error: no subcommand\n";
  return kExitUsage;
}

}  // namespace rdpr::cli
