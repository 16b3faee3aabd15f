#pragma once

#include "aoi/approx_aoi.hpp"
#include "aoi/simulator.hpp"
#include "aoi/types.hpp"

#include <functional>

namespace aoi {

enum class Metric { AvgAoI, Avp, Throughput };

enum class BaselineKind { FullBatteryOnly, AlwaysTransmit };

struct Objective {
  Metric metric = Metric::AvgAoI;
  long long theta = 1000;  // used when metric == Avp
  bool use_simulation = false;
  SimParams sim;
  CaptureOptions capture;
};

struct NelderMeadOptions {
  int max_evaluations = 4000;
  double simplex_scale = 0.25;
  double x_tolerance = 1e-6;
  double f_tolerance = 1e-10;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead on [0,1]^d with the standard coefficients (1, 2, 1/2, 1/2);
/// every proposed vertex is clipped to the box coordinate-wise.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {});

struct OptimizerOptions {
  int restarts = 8;  // baselines first, then seeded random interior points
  std::uint64_t seed = 7;
  NelderMeadOptions nelder_mead;
};

struct OptimizeResult {
  TransmissionPolicy policy;
  double objective_value = 0.0;  // metric value (not the internal sign)
  int evaluations = 0;
};

TransmissionPolicy baseline_policy(BaselineKind kind, int battery_capacity);

/// Signed objective (minimized): the metric itself for AvgAoI/Avp, the
/// negated throughput for Throughput. Non-terminating policies map to +inf.
double evaluate_objective(const SystemConfig& config, const TransmissionPolicy& policy,
                          const Objective& objective);

/// Multistart Nelder-Mead over pi in [0,1]^E; deterministic given the seed.
OptimizeResult optimize_policy(const SystemConfig& config, const Objective& objective,
                               const OptimizerOptions& opts = {});

}  // namespace aoi
