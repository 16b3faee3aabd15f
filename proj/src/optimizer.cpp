#include "aoi/optimizer.hpp"

#include "aoi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aoi {

namespace {

Eigen::VectorXd clip_box(Eigen::VectorXd x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::clamp(x(i), 0.0, 1.0);
  return x;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opts) {
  const int d = static_cast<int>(x0.size());
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  int evaluations = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evaluations;
    return f(x);
  };

  std::vector<Eigen::VectorXd> vertex(d + 1);
  std::vector<double> value(d + 1);
  vertex[0] = clip_box(x0);
  value[0] = eval(vertex[0]);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd v = vertex[0];
    // step into the box when a coordinate sits on the upper boundary
    v(i) += v(i) + opts.simplex_scale <= 1.0 ? opts.simplex_scale : -opts.simplex_scale;
    vertex[i + 1] = clip_box(v);
    value[i + 1] = eval(vertex[i + 1]);
  }

  std::vector<int> order(d + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return value[a] < value[b]; });
  };

  bool converged = false;
  while (evaluations < opts.max_evaluations) {
    sort_simplex();
    const int best = order[0], worst = order[d], second_worst = order[d - 1];

    double diameter = 0.0;
    for (int i = 1; i <= d; ++i)
      diameter = std::max(diameter, (vertex[order[i]] - vertex[best]).norm());
    if (diameter < opts.x_tolerance &&
        std::abs(value[worst] - value[best]) < opts.f_tolerance) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i <= d; ++i)
      if (i != worst) centroid += vertex[i];
    centroid /= d;

    const Eigen::VectorXd reflected = clip_box(centroid + kReflect * (centroid - vertex[worst]));
    const double f_reflected = eval(reflected);

    if (f_reflected < value[best]) {
      const Eigen::VectorXd expanded = clip_box(centroid + kExpand * (reflected - centroid));
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        vertex[worst] = expanded;
        value[worst] = f_expanded;
      } else {
        vertex[worst] = reflected;
        value[worst] = f_reflected;
      }
    } else if (f_reflected < value[second_worst]) {
      vertex[worst] = reflected;
      value[worst] = f_reflected;
    } else {
      const Eigen::VectorXd contracted =
          f_reflected < value[worst]
              ? clip_box(centroid + kContract * (reflected - centroid))
              : clip_box(centroid + kContract * (vertex[worst] - centroid));
      const double f_contracted = eval(contracted);
      if (f_contracted < std::min(value[worst], f_reflected)) {
        vertex[worst] = contracted;
        value[worst] = f_contracted;
      } else {
        for (int i = 0; i <= d; ++i) {
          if (i == best) continue;
          vertex[i] = clip_box(vertex[best] + kShrink * (vertex[i] - vertex[best]));
          value[i] = eval(vertex[i]);
        }
      }
    }
  }

  sort_simplex();
  NelderMeadResult result;
  result.x = vertex[order[0]];
  result.f = value[order[0]];
  result.evaluations = evaluations;
  result.converged = converged;
  return result;
}

TransmissionPolicy baseline_policy(BaselineKind kind, int battery_capacity) {
  std::vector<double> probs(battery_capacity, kind == BaselineKind::AlwaysTransmit ? 1.0 : 0.0);
  if (kind == BaselineKind::FullBatteryOnly) probs.back() = 1.0;
  return TransmissionPolicy(std::move(probs));
}

double evaluate_objective(const SystemConfig& config, const TransmissionPolicy& policy,
                          const Objective& objective) {
  try {
    if (objective.use_simulation) {
      SimParams sim = objective.sim;
      sim.theta = objective.theta;
      const SimResult r = simulate(config, policy, sim);
      switch (objective.metric) {
        case Metric::AvgAoI: return r.avg_aoi;
        case Metric::Avp: return r.avp;
        case Metric::Throughput: return -r.throughput;
      }
    }
    const ApproxMetrics m = approx_metrics(config, policy, objective.theta, objective.capture);
    switch (objective.metric) {
      case Metric::AvgAoI: return m.avg_aoi;
      case Metric::Avp: return m.avp;
      case Metric::Throughput: return -m.throughput;
    }
  } catch (const NoRefreshError&) {
    // pi == 0 corner: infinite age, zero throughput
    return objective.metric == Metric::Throughput ? 0.0
                                                  : std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::infinity();
}

OptimizeResult optimize_policy(const SystemConfig& config, const Objective& objective,
                               const OptimizerOptions& opts) {
  config.validate();
  const int E = config.battery_capacity;

  auto f = [&](const Eigen::VectorXd& x) {
    std::vector<double> probs(x.data(), x.data() + x.size());
    return evaluate_objective(config, TransmissionPolicy(std::move(probs)), objective);
  };

  std::vector<Eigen::VectorXd> starts;
  for (BaselineKind kind : {BaselineKind::FullBatteryOnly, BaselineKind::AlwaysTransmit}) {
    const TransmissionPolicy p = baseline_policy(kind, E);
    starts.push_back(Eigen::Map<const Eigen::VectorXd>(p.probs.data(), E));
  }
  Rng rng(opts.seed);
  while (static_cast<int>(starts.size()) < opts.restarts) {
    Eigen::VectorXd x(E);
    for (int i = 0; i < E; ++i) x(i) = rng.next_double();
    starts.push_back(std::move(x));
  }
  if (static_cast<int>(starts.size()) > opts.restarts)
    starts.resize(std::max(1, opts.restarts));

  OptimizeResult best;
  best.objective_value = std::numeric_limits<double>::infinity();
  int total_evals = 0;
  for (const Eigen::VectorXd& x0 : starts) {
    const NelderMeadResult r = nelder_mead(f, x0, opts.nelder_mead);
    total_evals += r.evaluations;
    if (r.f < best.objective_value || best.policy.capacity() == 0) {
      best.objective_value = r.f;
      best.policy = TransmissionPolicy(std::vector<double>(r.x.data(), r.x.data() + E));
    }
  }
  best.evaluations = total_evals;
  if (objective.metric == Metric::Throughput) best.objective_value = -best.objective_value;
  return best;
}

}  // namespace aoi
