#pragma once

#include "aoi/delivery.hpp"
#include "aoi/types.hpp"

#include <memory>

namespace aoi {

struct ExactOptions {
  /// Reject chains with more than this many composite states,
  /// counting 2 (E+1) C(U+E-1, E) before pruning.
  double state_space_cap = 2e5;
  CaptureOptions capture;
};

/// Ancillary chain (X, B, l) of the tagged device, with the unreachable
/// success states (S, b>0, .) pruned. The success states collapse into the
/// scalar absorption mass r per (b, l), so only the F-block is stored.
class AncillaryChain {
 public:
  AncillaryChain(const SystemConfig& config, const TransmissionPolicy& policy,
                 const ExactOptions& opts = {});

  int battery_capacity() const { return E_; }
  const ProfileSpace& profiles() const { return *profiles_; }

  /// F-state index of (battery b, profile index l).
  int state_index(int b, int profile_index) const { return b * profiles_->size() + profile_index; }
  int state_count() const { return (E_ + 1) * profiles_->size(); }

  /// Substochastic F -> F block.
  const Eigen::MatrixXd& q() const { return q_; }
  /// Absorption mass r(b,l) = alpha pi_b w_{b,l}.
  const Eigen::VectorXd& r() const { return r_; }
  /// Exact per-profile success probability w_{b,l} per F-state.
  const Eigen::VectorXd& success_prob() const { return w_; }
  /// Profile chain transition matrix.
  const Eigen::MatrixXd& profile_transitions() const { return profile_p_; }

  /// Distribution of the first post-refresh state: support on (F,0,.) and
  /// (F,1,.), the normalized outgoing mass of the refresh states.
  const Eigen::VectorXd& initial_distribution() const { return initial_; }

 private:
  int E_;
  std::shared_ptr<ProfileSpace> profiles_;
  Eigen::MatrixXd profile_p_;
  Eigen::MatrixXd q_;
  Eigen::VectorXd r_;
  Eigen::VectorXd w_;
  Eigen::VectorXd initial_;
};

AncillaryChain build_ancillary_chain(const SystemConfig& config,
                                     const TransmissionPolicy& policy,
                                     const ExactOptions& opts = {});

/// First two moments of the inter-refresh time via the first-step systems
/// (I-Q) e = 1 + r and (I-Q) e2 = -1 + 2e + r.
std::pair<double, double> inter_refresh_moments_exact(const AncillaryChain& chain);

/// 1 + E[Y^2] / (2 E[Y]).
double exact_avg_aoi(const SystemConfig& config, const TransmissionPolicy& policy,
                     const ExactOptions& opts = {});

}  // namespace aoi
