#pragma once

// Monte Carlo recovery sweeps over the sampling ratio alpha.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rdpr/solver.hpp"

namespace rdpr {

struct ExperimentManifest {
  int n = 100;
  int d = 2;
  std::vector<double> alpha_grid;
  int trials_per_alpha = 50;
  std::uint64_t base_seed = 20240601;
  SolverConfig solver_cfg;
  std::string artifact_version;

  void validate() const;
  /// n = 100, d = 2, alpha in {1.6, 1.8, ..., 3.4}, 50 trials.
  static ExperimentManifest sweep_default();
};

struct ExperimentRow {
  double alpha = 0.0;
  int m = 0;
  int successes = 0;
  int trials = 0;
  double success_rate = 0.0;
  double mean_overlap = 0.0;
  double mean_residual = 0.0;
  std::optional<double> wall_time_s;
  /// Trials that threw a numeric error; they count as failures and are
  /// left out of the means.
  int errors = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::optional<double> crossing_estimate;
};

/// Seed of trial `trial` at grid index `alpha_index`; injective in the pair
/// for trial < 2^32.
std::uint64_t child_seed(std::uint64_t base_seed, std::size_t alpha_index, std::size_t trial);

int measurements_for(double alpha, int n);

struct SweepOptions {
  unsigned threads = 0;  // 0: default_thread_count()
  bool timing = false;
  double crossing_level = 0.5;
};

ExperimentResult pt_sweep(const ExperimentManifest& manifest, const SweepOptions& opts = {});

/// Linear interpolation at the first upward crossing of `level`.
std::optional<double> estimate_crossing(const ExperimentResult& result, double level = 0.5);

double safer_compression(double alpha_star, double margin = 0.15);

nlohmann::json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentManifest& m);
ExperimentManifest manifest_from_json(const nlohmann::json& j);

inline constexpr const char* kSweepCsvHeader =
    "alpha,m,successes,trials,success_rate,mean_overlap,mean_residual,wall_time_s";

/// Comment line with version and parameters, the header row, then one row
/// per alpha. wall_time_s is empty unless the row carries a timing.
std::string result_to_csv(const ExperimentResult& result, const ExperimentManifest& manifest);

std::uint64_t fnv1a64(const std::string& bytes);

/// Sidecar: manifest, FNV-1a hash of the CSV text, per-row errors and
/// timings, and a creation timestamp.
nlohmann::json sweep_sidecar(const ExperimentResult& result, const ExperimentManifest& manifest,
                             const std::string& csv_text);

}  // namespace rdpr
