#include "rdpr/instance.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "rdpr/rng.hpp"

namespace rdpr {

namespace {

constexpr std::uint64_t kMatrixStream = 1;
constexpr std::uint64_t kSignalStream = 2;

void check_dims(int n, int m, int d) {
  if (n < 1 || m < 1 || d < 1) throw PreconditionError("instance: n, m, d must be >= 1");
}

void check_x(const MeasurementInstance& inst, const Eigen::VectorXd& x) {
  if (x.size() != inst.A.cols()) throw PreconditionError("x has the wrong length");
  if (!x.allFinite()) throw PreconditionError("x must be finite");
}

}  // namespace

void BarrierConfig::validate() const {
  if (!(t0_init > 0.0) || !(t0_max > t0_init)) throw PreconditionError("BarrierConfig: need 0 < t0_init < t0_max");
  if (!(t0_multiplier > 1.0)) throw PreconditionError("BarrierConfig: t0_multiplier must be > 1");
}

Eigen::MatrixXd generate_matrix(int n, int m, int d, std::uint64_t seed) {
  check_dims(n, m, d);
  const Eigen::Index rows = static_cast<Eigen::Index>(d) * m;
  const Eigen::Index cols = static_cast<Eigen::Index>(d) * n;
  const std::uint64_t key = stream_key(seed, kMatrixStream);
  Eigen::MatrixXd A(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      A(r, c) = normal_at(key, static_cast<std::uint64_t>(r * cols + c));
    }
  }
  return A;
}

Eigen::VectorXd grouped_energy(const Eigen::VectorXd& z, int m, int d) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < d; ++j) q += z.segment(static_cast<Eigen::Index>(j) * m, m).cwiseAbs2();
  return q;
}

MeasurementInstance generate_instance(int n, int m, int d, std::uint64_t seed,
                                      const std::optional<Eigen::VectorXd>& planted) {
  check_dims(n, m, d);
  MeasurementInstance inst;
  inst.n = n;
  inst.m = m;
  inst.d = d;
  inst.seed = seed;
  const Eigen::Index dn = static_cast<Eigen::Index>(d) * n;
  if (planted) {
    if (planted->size() != dn) throw PreconditionError("planted vector must have length d*n");
    const double norm = planted->norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DomainError("planted vector must be nonzero and finite");
    inst.x_true = *planted / norm;
  } else {
    const std::uint64_t key = stream_key(seed, kSignalStream);
    inst.x_true.resize(dn);
    for (Eigen::Index k = 0; k < dn; ++k) inst.x_true[k] = normal_at(key, static_cast<std::uint64_t>(k));
    inst.x_true.normalize();
  }
  inst.A = generate_matrix(n, m, d, seed);
  inst.y_bar = grouped_energy(inst.A * inst.x_true, m, d);
  return inst;
}

Eigen::MatrixXd b_matrix(const MeasurementInstance& inst, int i) {
  if (i < 0 || i >= inst.m) throw PreconditionError("b_matrix: index out of range");
  const Eigen::Index dn = inst.A.cols();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dn, dn);
  for (int j = 0; j < inst.d; ++j) {
    const auto row = inst.A.row(static_cast<Eigen::Index>(j) * inst.m + i);
    B.noalias() += row.transpose() * row;
  }
  return B;
}

double f_plain_grouped(const MeasurementInstance& inst, const Eigen::VectorXd& x) {
  check_x(inst, x);
  const Eigen::VectorXd q = grouped_energy(inst.A * x, inst.m, inst.d);
  return (inst.y_bar - q).squaredNorm();
}

Eigen::VectorXd grad_f_plain(const MeasurementInstance& inst, const Eigen::VectorXd& x) {
  check_x(inst, x);
  const Eigen::VectorXd z = inst.A * x;
  const Eigen::VectorXd res = grouped_energy(z, inst.m, inst.d) - inst.y_bar;
  Eigen::VectorXd w(z.size());
  for (int j = 0; j < inst.d; ++j) {
    const Eigen::Index off = static_cast<Eigen::Index>(j) * inst.m;
    w.segment(off, inst.m) = 4.0 * res.cwiseProduct(z.segment(off, inst.m));
  }
  return inst.A.transpose() * w;
}

double f_bar(const MeasurementInstance& inst, double t0, const Eigen::VectorXd& x) {
  check_x(inst, x);
  const double nx = x.squaredNorm();
  if (!(nx < 1.0)) throw DomainError("f_bar: ||x|| must be < 1");
  return t0 * f_plain_grouped(inst, x) - std::log1p(-nx);
}

Eigen::VectorXd grad_f_bar(const MeasurementInstance& inst, double t0, const Eigen::VectorXd& x) {
  check_x(inst, x);
  const double nx = x.squaredNorm();
  if (!(nx < 1.0)) throw DomainError("grad_f_bar: ||x|| must be < 1");
  return t0 * grad_f_plain(inst, x) + (2.0 / (1.0 - nx)) * x;
}

BarrierObjective::BarrierObjective(const MeasurementInstance& inst, double t0) : inst_(inst), t0_(t0) {
  if (!(t0 > 0.0)) throw PreconditionError("BarrierObjective: t0 must be > 0");
}

void BarrierObjective::evaluate(const Eigen::VectorXd& x) {
  x_cache_ = x;
  valid_ = true;
  const double nx = x.squaredNorm();
  if (!(nx < 1.0)) {
    f_cache_ = std::numeric_limits<double>::infinity();
    return;
  }
  z_.noalias() = inst_.A * x;
  residual_ = grouped_energy(z_, inst_.m, inst_.d) - inst_.y_bar;
  f_cache_ = t0_ * residual_.squaredNorm() - std::log1p(-nx);
}

double BarrierObjective::value(const Eigen::VectorXd& x) {
  evaluate(x);
  return f_cache_;
}

void BarrierObjective::gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  if (!valid_ || x_cache_.size() != x.size() || x_cache_ != x) evaluate(x);
  const double nx = x.squaredNorm();
  if (!(nx < 1.0)) throw DomainError("BarrierObjective: gradient outside the unit ball");
  w_.resize(z_.size());
  const int m = inst_.m;
  for (int j = 0; j < inst_.d; ++j) {
    const Eigen::Index off = static_cast<Eigen::Index>(j) * m;
    w_.segment(off, m) = (4.0 * t0_) * residual_.cwiseProduct(z_.segment(off, m));
  }
  g.noalias() = inst_.A.transpose() * w_;
  g += (2.0 / (1.0 - nx)) * x;
}

nlohmann::json instance_to_json(const MeasurementInstance& inst) {
  return {{"format", "rdpr-instance"},
          {"version", 1},
          {"seed", inst.seed},
          {"n", inst.n},
          {"m", inst.m},
          {"d", inst.d},
          {"x_true", std::vector<double>(inst.x_true.data(), inst.x_true.data() + inst.x_true.size())},
          {"y_bar", std::vector<double>(inst.y_bar.data(), inst.y_bar.data() + inst.y_bar.size())}};
}

MeasurementInstance instance_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "rdpr-instance") throw PreconditionError("not an instance file");
    const int n = j.at("n").get<int>(), m = j.at("m").get<int>(), d = j.at("d").get<int>();
    const auto seed = j.at("seed").get<std::uint64_t>();
    const auto xt = j.at("x_true").get<std::vector<double>>();
    const auto yb = j.at("y_bar").get<std::vector<double>>();
    check_dims(n, m, d);
    if (xt.size() != static_cast<std::size_t>(d) * n || yb.size() != static_cast<std::size_t>(m)) {
      throw PreconditionError("instance file: vector lengths do not match n, m, d");
    }
    MeasurementInstance inst;
    inst.n = n;
    inst.m = m;
    inst.d = d;
    inst.seed = seed;
    inst.x_true = Eigen::Map<const Eigen::VectorXd>(xt.data(), static_cast<Eigen::Index>(xt.size()));
    inst.y_bar = Eigen::Map<const Eigen::VectorXd>(yb.data(), static_cast<Eigen::Index>(yb.size()));
    inst.A = generate_matrix(n, m, d, seed);
    const Eigen::VectorXd check = grouped_energy(inst.A * inst.x_true, m, d);
    if ((check - inst.y_bar).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, inst.y_bar.cwiseAbs().maxCoeff())) {
      throw PreconditionError("instance file: y_bar does not match the matrix regenerated from the seed");
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("instance file: ") + e.what());
  }
}

}  // namespace rdpr
