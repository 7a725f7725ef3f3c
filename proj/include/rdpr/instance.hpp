#pragma once

// Random rank-d measurement ensembles and the solver objectives.

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>
#include "json.hpp"

#include "rdpr/errors.hpp"

namespace rdpr {

/// A has d*m rows and d*n columns. Row j*m + i holds the j-th factor of
/// measurement i, so y_bar[i] = sum_j (A.row(j*m + i) . x_true)^2.
struct MeasurementInstance {
  int n = 0;
  int m = 0;
  int d = 0;
  Eigen::MatrixXd A;
  Eigen::VectorXd x_true;
  Eigen::VectorXd y_bar;
  std::uint64_t seed = 0;
};

struct BarrierConfig {
  double t0_init = 0.01;
  double t0_multiplier = 1.6;
  double t0_max = 1e7;

  void validate() const;
};

/// Normals for A and a uniform planted vector on the unit sphere, both
/// from counter streams keyed on the seed. A given planted vector is
/// normalized; a zero vector throws DomainError.
MeasurementInstance generate_instance(int n, int m, int d, std::uint64_t seed,
                                      const std::optional<Eigen::VectorXd>& planted = std::nullopt);

/// The matrix A alone, as generate_instance would fill it.
Eigen::MatrixXd generate_matrix(int n, int m, int d, std::uint64_t seed);

/// Per-measurement sums of squares of z = A x, grouped by j*m + i.
Eigen::VectorXd grouped_energy(const Eigen::VectorXd& z, int m, int d);

/// sum_j A_{jm+i}^T A_{jm+i} for the 0-based measurement index i.
Eigen::MatrixXd b_matrix(const MeasurementInstance& inst, int i);

double f_plain_grouped(const MeasurementInstance& inst, const Eigen::VectorXd& x);
Eigen::VectorXd grad_f_plain(const MeasurementInstance& inst, const Eigen::VectorXd& x);

/// t0 * f_plain_grouped(x) - log(1 - ||x||^2). Throws DomainError for ||x|| >= 1.
double f_bar(const MeasurementInstance& inst, double t0, const Eigen::VectorXd& x);
Eigen::VectorXd grad_f_bar(const MeasurementInstance& inst, double t0, const Eigen::VectorXd& x);

/// f_bar with the product A x cached between a value call and the gradient
/// call at the same point. value() returns +inf outside the open unit ball.
class BarrierObjective {
 public:
  BarrierObjective(const MeasurementInstance& inst, double t0);

  double value(const Eigen::VectorXd& x);
  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g);
  void set_t0(double t0) { t0_ = t0; }
  double t0() const { return t0_; }

 private:
  void evaluate(const Eigen::VectorXd& x);

  const MeasurementInstance& inst_;
  double t0_;
  Eigen::VectorXd x_cache_, z_, residual_, w_;
  double f_cache_ = 0.0;
  bool valid_ = false;
};

/// seed, n, m, d, x_true and y_bar; A is regenerated from the seed on load.
nlohmann::json instance_to_json(const MeasurementInstance& inst);
/// Throws PreconditionError when the stored y_bar disagrees with the
/// regenerated A beyond 1e-10.
MeasurementInstance instance_from_json(const nlohmann::json& j);

}  // namespace rdpr
