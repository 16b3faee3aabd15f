#include "aoi/model_core.hpp"

#include <cmath>
#include <functional>

namespace aoi {

StochasticMatrix m1_transition_matrix(const SystemConfig& config,
                                      const TransmissionPolicy& policy) {
  config.validate();
  const int E = config.battery_capacity;
  if (policy.capacity() != E)
    throw std::invalid_argument("policy length does not match battery capacity");
  const double alpha = config.update_prob;
  const double eta = config.harvest_prob;

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(E + 1, E + 1);
  m(0, 0) = 1.0 - eta;
  m(0, 1) = eta;
  for (int i = 1; i < E; ++i) {
    const double tx = alpha * policy.prob(i);
    m(i, 0) += tx;
    m(i, i) += (1.0 - eta) * (1.0 - tx);
    m(i, i + 1) += eta * (1.0 - tx);
  }
  const double tx_full = alpha * policy.prob(E);
  m(E, 0) += tx_full;
  m(E, E) += 1.0 - tx_full;
  return StochasticMatrix(std::move(m));
}

BatteryDistribution battery_steady_state(const StochasticMatrix& m1) {
  const int dim = m1.dimension();
  if (m1(0, 1) <= 0.0)
    throw DegenerateChainError("no harvesting (eta = 0): battery chain is degenerate");

  // nu^T P = nu^T  <=>  (P^T - I) nu = 0; replace the first equation by sum = 1.
  Eigen::MatrixXd a = m1.matrix().transpose() - Eigen::MatrixXd::Identity(dim, dim);
  a.row(0).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  b(0) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw DegenerateChainError("battery chain has no unique stationary distribution");
  Eigen::VectorXd nu = lu.solve(b);

  double residual = (m1.matrix().transpose() * nu - nu).cwiseAbs().maxCoeff();
  if (residual > 1e-10 || nu.minCoeff() < -1e-10)
    throw DegenerateChainError("battery chain stationary solve failed");

  BatteryDistribution dist;
  dist.nu.resize(dim);
  double sum = 0.0;
  for (int i = 0; i < dim; ++i) {
    dist.nu[i] = std::max(nu(i), 0.0);
    sum += dist.nu[i];
  }
  for (double& v : dist.nu) v /= sum;
  return dist;
}

namespace {

void enumerate_rec(int level, int remaining, std::vector<int>& counts,
                   std::vector<BatteryProfile>& out) {
  if (level == 0) {
    counts[0] = remaining;
    out.emplace_back(counts);
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    counts[level] = c;
    enumerate_rec(level - 1, remaining - c, counts, out);
  }
}

std::string profile_key(const BatteryProfile& p) {
  std::string key;
  for (int c : p.counts) {
    key += std::to_string(c);
    key += ',';
  }
  return key;
}

}  // namespace

std::vector<BatteryProfile> enumerate_profiles(int device_count, int battery_capacity) {
  if (device_count < 0) throw std::invalid_argument("device_count must be >= 0");
  if (battery_capacity < 1) throw std::invalid_argument("battery_capacity must be >= 1");
  // Colex ascending: L_E is the most significant coordinate and varies
  // slowest; L_0 is the forced remainder.
  std::vector<BatteryProfile> out;
  std::vector<int> counts(battery_capacity + 1, 0);
  enumerate_rec(battery_capacity, device_count, counts, out);
  return out;
}

double profile_count(int device_count, int battery_capacity) {
  double c = 1.0;
  for (int i = 1; i <= battery_capacity; ++i)
    c *= static_cast<double>(device_count + i) / i;
  return c;
}

namespace {

double log_binom(int n, int k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

double pow_count(double p, int k) {
  if (k == 0) return 1.0;  // 0^0 = 1: no device takes this flow
  return std::pow(p, k);
}

}  // namespace

double profile_transition_prob(const BatteryProfile& from, const BatteryProfile& to,
                               const StochasticMatrix& m1) {
  const int E = from.levels();
  if (to.levels() != E) throw std::invalid_argument("profile dimensions differ");
  if (from.total() != to.total()) throw std::invalid_argument("profile totals differ");
  if (m1.dimension() != E + 1) throw std::invalid_argument("m1 dimension mismatch");

  const auto& lp = from.counts;  // l' (start of slot)
  const auto& l = to.counts;     // l  (end of slot)

  // Free flows: u_{j,0} for j in [1,E]. Everything else is forced:
  //   u_{E,E} = l'_E - u_{E,0}
  //   u_{j,j+1} = l_{j+1} - u_{j+1,j+1}          (j = E-1 .. 0)
  //   u_{j,j} = l'_j - u_{j,0} - u_{j,j+1}       (j = E-1 .. 1)
  //   u_{0,0} = l'_0 - u_{0,1}
  double total = 0.0;
  std::vector<int> u_drain(E + 1, 0);  // u_{j,0}
  std::vector<int> u_stay(E + 1, 0);   // u_{j,j}
  std::vector<int> u_up(E + 1, 0);     // u_{j,j+1}
  std::function<void(int)> iterate = [&](int j) {
    if (j == 0) {
      // resolve forced flows
      u_stay[E] = lp[E] - u_drain[E];
      if (u_stay[E] < 0) return;
      for (int k = E - 1; k >= 1; --k) {
        u_up[k] = l[k + 1] - u_stay[k + 1];
        if (u_up[k] < 0) return;
        u_stay[k] = lp[k] - u_drain[k] - u_up[k];
        if (u_stay[k] < 0) return;
      }
      u_up[0] = l[1] - u_stay[1];
      if (u_up[0] < 0) return;
      u_stay[0] = lp[0] - u_up[0];
      if (u_stay[0] < 0) return;
      // the l_0 equation is implied by conservation; check anyway
      int into_zero = u_stay[0];
      for (int k = 1; k <= E; ++k) into_zero += u_drain[k];
      if (into_zero != l[0]) return;

      double log_coeff = log_binom(lp[0], u_stay[0]) + log_binom(lp[E], u_drain[E]);
      for (int k = 1; k < E; ++k)
        log_coeff += log_binom(lp[k], u_drain[k]) + log_binom(lp[k] - u_drain[k], u_stay[k]);

      double prob = std::exp(log_coeff);
      prob *= pow_count(m1(0, 0), u_stay[0]) * pow_count(m1(0, 1), u_up[0]);
      for (int k = 1; k < E; ++k)
        prob *= pow_count(m1(k, 0), u_drain[k]) * pow_count(m1(k, k), u_stay[k]) *
                pow_count(m1(k, k + 1), u_up[k]);
      prob *= pow_count(m1(E, 0), u_drain[E]) * pow_count(m1(E, E), u_stay[E]);
      total += prob;
      return;
    }
    for (int u = 0; u <= lp[j]; ++u) {
      u_drain[j] = u;
      iterate(j - 1);
    }
  };
  iterate(E);
  return total;
}

ProfileSpace::ProfileSpace(int device_count, int battery_capacity)
    : device_count_(device_count),
      profiles_(enumerate_profiles(device_count, battery_capacity)) {
  index_.reserve(profiles_.size());
  for (int i = 0; i < static_cast<int>(profiles_.size()); ++i)
    index_.emplace(profile_key(profiles_[i]), i);
}

int ProfileSpace::index_of(const BatteryProfile& p) const {
  auto it = index_.find(profile_key(p));
  if (it == index_.end()) throw std::invalid_argument("profile not in space");
  return it->second;
}

Eigen::MatrixXd ProfileSpace::transition_matrix(const StochasticMatrix& m1) const {
  const int n = size();
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      p(i, j) = profile_transition_prob(profiles_[i], profiles_[j], m1);
  return p;
}

double multinomial_profile_pmf(const BatteryProfile& profile, const BatteryDistribution& nu) {
  if (profile.levels() != nu.capacity()) throw std::invalid_argument("dimension mismatch");
  const int n = profile.total();
  double log_pmf = std::lgamma(n + 1);
  for (int i = 0; i <= profile.levels(); ++i) {
    const int c = profile.counts[i];
    log_pmf -= std::lgamma(c + 1);
    if (c > 0) {
      if (nu[i] <= 0.0) return 0.0;
      log_pmf += c * std::log(nu[i]);
    }
  }
  return std::exp(log_pmf);
}

}  // namespace aoi
