#pragma once

#include "aoi/types.hpp"

#include <unordered_map>

namespace aoi {

/// Single-device battery chain M1 over levels 0..E.
///
/// Row 0: stays with 1-eta, harvests to 1 with eta.
/// Row i in [1,E-1]: drains to 0 with alpha*pi_i, stays with
/// (1-eta)(1-alpha*pi_i), harvests up with eta*(1-alpha*pi_i).
/// Row E: drains with alpha*pi_E, otherwise stays (harvesting pauses
/// when the battery is full).
StochasticMatrix m1_transition_matrix(const SystemConfig& config,
                                      const TransmissionPolicy& policy);

/// Stationary distribution of M1, solved as a linear system with one
/// balance equation replaced by the normalization constraint.
/// Throws DegenerateChainError when eta == 0 (entry (0,1) of M1).
BatteryDistribution battery_steady_state(const StochasticMatrix& m1);

/// All compositions of `device_count` into E+1 nonnegative parts, in
/// colexicographic order over (L_0,...,L_E): L_E varies slowest, L_0 is
/// the forced remainder. Cardinality C(device_count+E, E).
std::vector<BatteryProfile> enumerate_profiles(int device_count, int battery_capacity);

/// Number of profiles, C(device_count + E, E), as a double (overflow-safe
/// for cap checks).
double profile_count(int device_count, int battery_capacity);

/// Probability that `device_count` independent M1 chains move the aggregate
/// occupancy from `from` to `to`. Sums multinomial terms over all feasible
/// flow tables {u_{j,k}}; only flows j->j, j->j+1, j->0 exist, so fixing
/// u_{j,0} for j in [1,E] forces the rest.
double profile_transition_prob(const BatteryProfile& from, const BatteryProfile& to,
                               const StochasticMatrix& m1);

/// Indexed profile state space with the transition matrix of the aggregate
/// occupancy chain. Profile indices follow enumerate_profiles order.
class ProfileSpace {
 public:
  ProfileSpace(int device_count, int battery_capacity);

  int size() const { return static_cast<int>(profiles_.size()); }
  const BatteryProfile& profile(int index) const { return profiles_.at(index); }
  int index_of(const BatteryProfile& p) const;
  int device_count() const { return device_count_; }

  /// Dense |L| x |L| transition matrix built from profile_transition_prob.
  Eigen::MatrixXd transition_matrix(const StochasticMatrix& m1) const;

 private:
  int device_count_;
  std::vector<BatteryProfile> profiles_;
  std::unordered_map<std::string, int> index_;
};

/// Multinomial pmf of a profile under per-level probabilities nu.
double multinomial_profile_pmf(const BatteryProfile& profile, const BatteryDistribution& nu);

}  // namespace aoi
