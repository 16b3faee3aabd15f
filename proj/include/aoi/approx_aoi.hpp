#pragma once

#include "aoi/delivery.hpp"
#include "aoi/types.hpp"

namespace aoi {

/// Terminating chain M2 of the refresh process: E+1 transient states
/// (battery 0 with no refresh yet, batteries 1..E) and one absorbing
/// refresh state. State 0 is both the start state (right after a refresh
/// the battery is empty) and the index read out of every matrix power.
struct PhaseTypeModel {
  Eigen::MatrixXd T;   // (E+1) x (E+1) transient part
  Eigen::VectorXd t0;  // absorption vector, t0(0) = 0

  int capacity() const { return static_cast<int>(T.rows()) - 1; }
};

/// Assembles M2 from the battery dynamics and the averaged success
/// probabilities w-bar (indexed by level, entry 0 ignored).
PhaseTypeModel build_phase_type(const SystemConfig& config,
                                const TransmissionPolicy& policy,
                                const std::vector<double>& wbar);

/// P{Y = y} = [T^(y-1) t0]_1 and P{Y >= y} = [T^(y-1) 1]_1.
double inter_refresh_pmf(const PhaseTypeModel& model, long long y);
double inter_refresh_ccdf(const PhaseTypeModel& model, long long y);

/// pmf table for y = 1..max_y in one sweep of row-vector products.
std::vector<double> inter_refresh_pmf_table(const PhaseTypeModel& model, long long max_y);

/// E[Y] = [(I-T)^-1 1]_1, E[Y^2] = 2 [(I-T)^-2 1]_1 - E[Y], via two solves.
/// Throws NoRefreshError when the model never absorbs.
std::pair<double, double> inter_refresh_moments(const PhaseTypeModel& model);

/// 1/2 + [(I-T)^-2 1]_1 / [(I-T)^-1 1]_1, identical to 1 + E[Y^2]/(2 E[Y]).
double approx_avg_aoi(const PhaseTypeModel& model);

/// Age-violation probability: the fraction of time the age exceeds theta.
/// zeta(1) = 1 by convention (every cycle spends its last (y - theta + 1)+
/// slots above the threshold).
double avp(const PhaseTypeModel& model, long long theta);

/// Full approximate pipeline output for one (config, policy) pair.
struct ApproxMetrics {
  double avg_aoi = 0.0;
  double avp = 0.0;
  double throughput = 0.0;
  double mean_y = 0.0;
  double mean_y2 = 0.0;
  BatteryDistribution nu;
  std::vector<double> wbar;
};

ApproxMetrics approx_metrics(const SystemConfig& config, const TransmissionPolicy& policy,
                             long long theta, const CaptureOptions& opts = {});

}  // namespace aoi
