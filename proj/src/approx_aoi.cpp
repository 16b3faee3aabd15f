#include "aoi/approx_aoi.hpp"

#include <algorithm>
#include <cmath>

namespace aoi {

PhaseTypeModel build_phase_type(const SystemConfig& config,
                                const TransmissionPolicy& policy,
                                const std::vector<double>& wbar) {
  const int E = config.battery_capacity;
  if (policy.capacity() != E || static_cast<int>(wbar.size()) != E + 1)
    throw std::invalid_argument("build_phase_type dimension mismatch");
  for (int b = 1; b <= E; ++b)
    if (wbar[b] < 0.0 || wbar[b] > 1.0)
      throw std::invalid_argument("wbar entries must be probabilities");
  const double alpha = config.update_prob;
  const double eta = config.harvest_prob;

  PhaseTypeModel model;
  model.T = Eigen::MatrixXd::Zero(E + 1, E + 1);
  model.t0 = Eigen::VectorXd::Zero(E + 1);

  model.T(0, 0) = 1.0 - eta;
  model.T(0, 1) = eta;
  for (int b = 1; b < E; ++b) {
    const double tx = alpha * policy.prob(b);
    model.T(b, 0) = tx * (1.0 - wbar[b]);
    model.T(b, b) = (1.0 - eta) * (1.0 - tx);
    model.T(b, b + 1) = eta * (1.0 - tx);
    model.t0(b) = tx * wbar[b];
  }
  const double tx_full = alpha * policy.prob(E);
  model.T(E, 0) = tx_full * (1.0 - wbar[E]);
  model.T(E, E) = 1.0 - tx_full;  // full battery: harvesting pauses
  model.t0(E) = tx_full * wbar[E];
  return model;
}

namespace {

Eigen::RowVectorXd start_row(const PhaseTypeModel& model) {
  Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(model.T.rows());
  a(0) = 1.0;
  return a;
}

}  // namespace

double inter_refresh_pmf(const PhaseTypeModel& model, long long y) {
  if (y < 1) throw std::invalid_argument("y must be >= 1");
  Eigen::RowVectorXd a = start_row(model);
  for (long long i = 1; i < y; ++i) a = a * model.T;
  return a.dot(model.t0);
}

double inter_refresh_ccdf(const PhaseTypeModel& model, long long y) {
  if (y < 1) throw std::invalid_argument("y must be >= 1");
  Eigen::RowVectorXd a = start_row(model);
  for (long long i = 1; i < y; ++i) a = a * model.T;
  return a.sum();
}

std::vector<double> inter_refresh_pmf_table(const PhaseTypeModel& model, long long max_y) {
  std::vector<double> pmf;
  pmf.reserve(static_cast<std::size_t>(max_y));
  Eigen::RowVectorXd a = start_row(model);
  for (long long y = 1; y <= max_y; ++y) {
    pmf.push_back(a.dot(model.t0));
    a = a * model.T;
  }
  return pmf;
}

namespace {

/// Solves (I-T)x = 1 and (I-T)z = x; throws when the chain cannot absorb.
std::pair<Eigen::VectorXd, Eigen::VectorXd> fundamental_solves(const PhaseTypeModel& model) {
  if (model.t0.maxCoeff() <= 0.0)
    throw NoRefreshError("absorption vector is zero: the AoI never refreshes");
  const Eigen::Index dim = model.T.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim) - model.T;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw NoRefreshError("I - T is singular: refresh state unreachable");
  Eigen::VectorXd x = lu.solve(Eigen::VectorXd::Ones(dim));
  if (!(x.minCoeff() > 0.0) || !x.allFinite())
    throw NoRefreshError("phase-type model is not terminating");
  Eigen::VectorXd z = lu.solve(x);
  return {std::move(x), std::move(z)};
}

}  // namespace

std::pair<double, double> inter_refresh_moments(const PhaseTypeModel& model) {
  auto [x, z] = fundamental_solves(model);
  const double mean = x(0);
  const double second = 2.0 * z(0) - mean;
  return {mean, second};
}

double approx_avg_aoi(const PhaseTypeModel& model) {
  auto [x, z] = fundamental_solves(model);
  return 0.5 + z(0) / x(0);
}

double avp(const PhaseTypeModel& model, long long theta) {
  if (theta < 1) throw std::invalid_argument("theta must be >= 1");
  auto [x, z] = fundamental_solves(model);
  const double mean_y = x(0);

  // zeta = E[(Y - theta + 1)+] / E[Y]
  //      = 1 - (sum_{y=1}^{theta-1} y P{Y=y} + (theta-1) P{Y>=theta}) / E[Y],
  // with the matrix powers accumulated in a single row-vector sweep.
  Eigen::RowVectorXd a = start_row(model);
  double weighted_sum = 0.0;
  for (long long y = 1; y <= theta - 1; ++y) {
    weighted_sum += static_cast<double>(y) * a.dot(model.t0);
    a = a * model.T;
  }
  const double ccdf_theta = a.sum();  // a = e1^T T^(theta-1)
  const double value =
      1.0 - (weighted_sum + static_cast<double>(theta - 1) * ccdf_theta) / mean_y;
  return std::clamp(value, 0.0, 1.0);
}

ApproxMetrics approx_metrics(const SystemConfig& config, const TransmissionPolicy& policy,
                             long long theta, const CaptureOptions& opts) {
  const StochasticMatrix m1 = m1_transition_matrix(config, policy);
  ApproxMetrics out;
  out.nu = battery_steady_state(m1);
  out.wbar = avg_success_probs(out.nu, config.device_count, policy, config.update_prob,
                               config.channel, config.decoding_mode, opts);
  const PhaseTypeModel model = build_phase_type(config, policy, out.wbar);
  auto [mean, second] = inter_refresh_moments(model);
  out.mean_y = mean;
  out.mean_y2 = second;
  out.avg_aoi = 1.0 + second / (2.0 * mean);
  out.avp = avp(model, theta);
  out.throughput = throughput(config, policy, out.nu, out.wbar);
  return out;
}

}  // namespace aoi
