#include "aoi/exact_aoi.hpp"

#include <cmath>
#include <cstdio>

namespace aoi {

AncillaryChain::AncillaryChain(const SystemConfig& config, const TransmissionPolicy& policy,
                               const ExactOptions& opts) {
  config.validate();
  E_ = config.battery_capacity;
  if (policy.capacity() != E_)
    throw std::invalid_argument("policy length does not match battery capacity");

  const int others = config.device_count - 1;
  const double composite_states = 2.0 * (E_ + 1) * profile_count(others, E_);
  if (composite_states > opts.state_space_cap) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "ancillary chain needs %.4g composite states, cap is %.4g",
                  composite_states, opts.state_space_cap);
    throw StateSpaceCapError(msg);
  }

  const double alpha = config.update_prob;
  const double eta = config.harvest_prob;
  const StochasticMatrix m1 = m1_transition_matrix(config, policy);

  profiles_ = std::make_shared<ProfileSpace>(others, E_);
  const int n_profiles = profiles_->size();
  profile_p_ = profiles_->transition_matrix(m1);

  // Exact per-profile success probability of the tagged device.
  w_ = Eigen::VectorXd::Zero(state_count());
  for (int b = 1; b <= E_; ++b) {
    for (int l = 0; l < n_profiles; ++l) {
      const BatteryProfile& profile = profiles_->profile(l);
      double w;
      if (config.decoding_mode == DecodingMode::NoCapture) {
        w = success_prob_no_capture(b, profile, policy, alpha, config.channel,
                                    opts.capture.singleton_includes_alpha);
      } else {
        w = success_prob_capture(b, profile, policy, alpha, config.channel, opts.capture);
      }
      w_(state_index(b, l)) = w;
    }
  }

  // F -> F block: q((b',l') -> (b,l)) = battery_factor(b',b,l') P[l' -> l].
  // battery_factor = (1 - alpha pi_b' [b'>0]) ((1-eta)[b=b'<E] + eta[b=b'+1]
  //                  + [b=b'=E]) + alpha pi_b' (1 - w_{b',l'}) [b=0].
  q_ = Eigen::MatrixXd::Zero(state_count(), state_count());
  r_ = Eigen::VectorXd::Zero(state_count());
  for (int bp = 0; bp <= E_; ++bp) {
    const double tx = alpha * policy.prob(bp);
    for (int lp = 0; lp < n_profiles; ++lp) {
      const int src = state_index(bp, lp);
      const double w = bp > 0 ? w_(src) : 0.0;
      r_(src) = tx * w;

      double to_same = 0.0, to_up = 0.0, to_zero = tx * (1.0 - w);
      if (bp == E_) {
        to_same = 1.0 - tx;
      } else {
        to_same = (1.0 - tx) * (1.0 - eta);
        to_up = (1.0 - tx) * eta;
      }
      for (int l = 0; l < n_profiles; ++l) {
        const double pl = profile_p_(lp, l);
        if (pl == 0.0) continue;
        q_(src, state_index(bp, l)) += to_same * pl;
        if (bp < E_) q_(src, state_index(bp + 1, l)) += to_up * pl;
        if (to_zero > 0.0) q_(src, state_index(0, l)) += to_zero * pl;
      }
    }
  }

  // First post-refresh state: from any refresh state the next state is
  // (F,0,.) wp 1-eta or (F,1,.) wp eta; the pre-refresh profile l' is taken
  // uniform, so the incoming mass of each l is the l'-averaged column sum.
  initial_ = Eigen::VectorXd::Zero(state_count());
  for (int l = 0; l < n_profiles; ++l) {
    double incoming = 0.0;
    for (int lp = 0; lp < n_profiles; ++lp) incoming += profile_p_(lp, l);
    incoming /= static_cast<double>(n_profiles);
    initial_(state_index(0, l)) = (1.0 - eta) * incoming;
    if (E_ >= 1) initial_(state_index(1, l)) = eta * incoming;
  }
}

AncillaryChain build_ancillary_chain(const SystemConfig& config,
                                     const TransmissionPolicy& policy,
                                     const ExactOptions& opts) {
  return AncillaryChain(config, policy, opts);
}

std::pair<double, double> inter_refresh_moments_exact(const AncillaryChain& chain) {
  if (chain.r().maxCoeff() <= 0.0)
    throw NoRefreshError("no transmitting state: the AoI never refreshes");

  const Eigen::Index dim = chain.q().rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim) - chain.q();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dim);
  Eigen::VectorXd e = lu.solve(ones + chain.r());
  if (!e.allFinite() || e.minCoeff() < 1.0 - 1e-9)
    throw NoRefreshError("first-step system has no valid solution");
  Eigen::VectorXd e2 = lu.solve(-ones + 2.0 * e + chain.r());
  if (!e2.allFinite())
    throw NoRefreshError("second-moment system has no valid solution");

  const double mean = chain.initial_distribution().dot(e);
  const double second = chain.initial_distribution().dot(e2);
  return {mean, second};
}

double exact_avg_aoi(const SystemConfig& config, const TransmissionPolicy& policy,
                     const ExactOptions& opts) {
  const AncillaryChain chain(config, policy, opts);
  auto [mean, second] = inter_refresh_moments_exact(chain);
  return 1.0 + second / (2.0 * mean);
}

}  // namespace aoi
