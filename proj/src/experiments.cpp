#include "rdpr/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "rdpr/parallel.hpp"
#include "rdpr/rng.hpp"
#include "rdpr/version.hpp"

namespace rdpr {

void ExperimentManifest::validate() const {
  if (n < 1 || d < 1) throw PreconditionError("manifest: n and d must be >= 1");
  if (alpha_grid.empty()) throw PreconditionError("manifest: alpha_grid must be non-empty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] > 0.0) || !std::isfinite(alpha_grid[i])) {
      throw PreconditionError("manifest: alpha values must be positive");
    }
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw PreconditionError("manifest: alpha_grid must be strictly increasing");
    }
    if (measurements_for(alpha_grid[i], n) < 1) throw PreconditionError("manifest: round(alpha * n) must be >= 1");
  }
  if (trials_per_alpha < 1) throw PreconditionError("manifest: trials_per_alpha must be >= 1");
  solver_cfg.validate();
}

ExperimentManifest ExperimentManifest::sweep_default() {
  ExperimentManifest m;
  for (int k = 0; k < 10; ++k) m.alpha_grid.push_back(1.6 + 0.2 * k);
  m.artifact_version = kVersion;
  return m;
}

std::uint64_t child_seed(std::uint64_t base_seed, std::size_t alpha_index, std::size_t trial) {
  return mix64(base_seed + ((static_cast<std::uint64_t>(alpha_index) << 32) | static_cast<std::uint64_t>(trial)));
}

int measurements_for(double alpha, int n) { return static_cast<int>(std::lround(alpha * n)); }

namespace {

struct TrialOutcome {
  bool ok = false;
  bool success = false;
  double overlap = 0.0;
  double residual = 0.0;
  double seconds = 0.0;
};

}  // namespace

ExperimentResult pt_sweep(const ExperimentManifest& manifest, const SweepOptions& opts) {
  manifest.validate();
  const std::size_t na = manifest.alpha_grid.size();
  const std::size_t nt = static_cast<std::size_t>(manifest.trials_per_alpha);
  std::vector<TrialOutcome> outcomes(na * nt);
  const unsigned threads = opts.threads > 0 ? opts.threads : default_thread_count();

  parallel_for(outcomes.size(), threads, [&](std::size_t task) {
    const std::size_t ai = task / nt, t = task % nt;
    const auto start = std::chrono::steady_clock::now();
    TrialOutcome& o = outcomes[task];
    try {
      const MeasurementInstance inst =
          generate_instance(manifest.n, measurements_for(manifest.alpha_grid[ai], manifest.n), manifest.d,
                            child_seed(manifest.base_seed, ai, t));
      const SolverResult r = gradbar(inst, manifest.solver_cfg);
      o.ok = true;
      o.success = is_success(r, manifest.solver_cfg.success_overlap);
      o.overlap = r.overlap;
      o.residual = r.residual;
    } catch (const NumericError&) {
      o.ok = false;
    } catch (const PreconditionError&) {
      o.ok = false;
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  ExperimentResult res;
  for (std::size_t ai = 0; ai < na; ++ai) {
    ExperimentRow row;
    row.alpha = manifest.alpha_grid[ai];
    row.m = measurements_for(row.alpha, manifest.n);
    row.trials = manifest.trials_per_alpha;
    double ov = 0.0, rs = 0.0, secs = 0.0;
    int ok = 0;
    for (std::size_t t = 0; t < nt; ++t) {
      const TrialOutcome& o = outcomes[ai * nt + t];
      secs += o.seconds;
      if (!o.ok) {
        ++row.errors;
        continue;
      }
      ++ok;
      row.successes += o.success ? 1 : 0;
      ov += o.overlap;
      rs += o.residual;
    }
    row.success_rate = static_cast<double>(row.successes) / row.trials;
    row.mean_overlap = ok > 0 ? ov / ok : 0.0;
    row.mean_residual = ok > 0 ? rs / ok : 0.0;
    if (opts.timing) row.wall_time_s = secs;
    res.rows.push_back(row);
  }
  res.crossing_estimate = estimate_crossing(res, opts.crossing_level);
  return res;
}

std::optional<double> estimate_crossing(const ExperimentResult& result, double level) {
  const auto& rows = result.rows;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double a = rows[i].success_rate, b = rows[i + 1].success_rate;
    if (a < level && b >= level) {
      return rows[i].alpha + (level - a) / (b - a) * (rows[i + 1].alpha - rows[i].alpha);
    }
  }
  return std::nullopt;
}

double safer_compression(double alpha_star, double margin) {
  if (!(alpha_star > 0.0)) throw PreconditionError("safer_compression: alpha_star must be > 0");
  if (!(margin >= 0.0 && margin <= 0.5)) throw PreconditionError("safer_compression: margin must be in [0, 0.5]");
  return alpha_star * (1.0 + margin);
}

nlohmann::json to_json(const SolverConfig& c) {
  return {{"t0_init", c.barrier.t0_init},
          {"t0_multiplier", c.barrier.t0_multiplier},
          {"t0_max", c.barrier.t0_max},
          {"init_norm", c.init_norm},
          {"armijo_sigma", c.armijo_sigma},
          {"backtrack_beta", c.backtrack_beta},
          {"step_init", c.step_init},
          {"grad_tol", c.grad_tol},
          {"max_inner_iters", c.max_inner_iters},
          {"success_overlap", c.success_overlap},
          {"rel_decrease_tol", c.rel_decrease_tol},
          {"warm_step", c.warm_step},
          {"max_move", c.max_move}};
}

SolverConfig solver_config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  try {
    c.barrier.t0_init = j.value("t0_init", c.barrier.t0_init);
    c.barrier.t0_multiplier = j.value("t0_multiplier", c.barrier.t0_multiplier);
    c.barrier.t0_max = j.value("t0_max", c.barrier.t0_max);
    c.init_norm = j.value("init_norm", c.init_norm);
    c.armijo_sigma = j.value("armijo_sigma", c.armijo_sigma);
    c.backtrack_beta = j.value("backtrack_beta", c.backtrack_beta);
    c.step_init = j.value("step_init", c.step_init);
    c.grad_tol = j.value("grad_tol", c.grad_tol);
    c.max_inner_iters = j.value("max_inner_iters", c.max_inner_iters);
    c.success_overlap = j.value("success_overlap", c.success_overlap);
    c.rel_decrease_tol = j.value("rel_decrease_tol", c.rel_decrease_tol);
    c.warm_step = j.value("warm_step", c.warm_step);
    c.max_move = j.value("max_move", c.max_move);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("solver config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentManifest& m) {
  return {{"n", m.n},
          {"d", m.d},
          {"alpha_grid", m.alpha_grid},
          {"trials_per_alpha", m.trials_per_alpha},
          {"base_seed", m.base_seed},
          {"solver", to_json(m.solver_cfg)},
          {"artifact_version", m.artifact_version}};
}

ExperimentManifest manifest_from_json(const nlohmann::json& j) {
  ExperimentManifest m = ExperimentManifest::sweep_default();
  try {
    m.n = j.value("n", m.n);
    m.d = j.value("d", m.d);
    if (j.contains("alpha_grid")) m.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    m.trials_per_alpha = j.value("trials_per_alpha", m.trials_per_alpha);
    m.base_seed = j.value("base_seed", m.base_seed);
    if (j.contains("solver")) m.solver_cfg = solver_config_from_json(j.at("solver"));
    m.artifact_version = j.value("artifact_version", std::string(kVersion));
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("manifest: ") + e.what());
  }
  m.validate();
  return m;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string result_to_csv(const ExperimentResult& result, const ExperimentManifest& manifest) {
  std::ostringstream os;
  os << "# rdpr " << kVersion << " simulate " << to_json(manifest).dump() << '\n';
  os << kSweepCsvHeader << '\n';
  for (const auto& r : result.rows) {
    os << num(r.alpha) << ',' << r.m << ',' << r.successes << ',' << r.trials << ',' << num(r.success_rate) << ','
       << num(r.mean_overlap) << ',' << num(r.mean_residual) << ',';
    if (r.wall_time_s) os << num(*r.wall_time_s);
    os << '\n';
  }
  return os.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json sweep_sidecar(const ExperimentResult& result, const ExperimentManifest& manifest,
                             const std::string& csv_text) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(csv_text)));
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json row{{"alpha", r.alpha}, {"errors", r.errors}};
    if (r.wall_time_s) row["wall_time_s"] = *r.wall_time_s;
    rows.push_back(std::move(row));
  }
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  nlohmann::json j{{"manifest", to_json(manifest)}, {"csv_fnv1a64", hash}, {"rows", rows}, {"created_utc", stamp}};
  if (result.crossing_estimate) {
    j["crossing_estimate"] = *result.crossing_estimate;
    j["safer_compression"] = safer_compression(*result.crossing_estimate);
  }
  return j;
}

}  // namespace rdpr
