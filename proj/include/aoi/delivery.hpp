#pragma once

#include "aoi/model_core.hpp"
#include "aoi/types.hpp"

#include <cstdint>

namespace aoi {

/// Gaussian tail Q(x) = erfc(x/sqrt(2))/2, argument clamped to +-38 so the
/// result saturates at 0/1 instead of under/overflowing.
double q_function(double x);

/// Transmitting interferers per battery level (L-bar counts). Level 0 is
/// kept for index alignment and always contributes zero power.
struct InterferenceState {
  std::vector<int> transmit_counts;  // size E+1

  /// P-tilde = sum_i i*count_i / (n sigma^2)
  double interference_to_noise(const ChannelParams& ch) const;
  /// P-bar = (b / (n sigma^2)) / (P-tilde + 1)
  double sinr(int b, const ChannelParams& ch) const;
  /// P-breve = sum_i i^2*count_i / (n sigma^2)^2
  double second_moment(const ChannelParams& ch) const;
};

/// Decoding error probability of a lone transmission at energy b, from the
/// normal approximation Q(sqrt(n/V(b)) (C(b) - R)). By convention
/// singleton_error_prob(0) = 1: zero transmit power carries no rate.
double singleton_error_prob(int b, const ChannelParams& ch);

/// Same approximation with C,V replaced by their interference-aware
/// counterparts. With zero interferers this reduces to
/// singleton_error_prob(b) exactly (shared evaluation path).
double capture_error_prob(int b, const InterferenceState& interferers,
                          const ChannelParams& ch);

/// Options shared by the capture-mode expectation paths.
struct CaptureOptions {
  /// Exact enumeration whenever the joint support of the transmit counts
  /// has at most this many points.
  std::size_t exact_support_cap = 100000;
  /// Monte-Carlo draws on the sampled path.
  std::size_t sampler_budget = 10000;
  std::uint64_t seed = 0x6aa1c3u;
  /// Singleton probability per slot model: each interferer at level i
  /// transmits wp alpha*pi_i. Setting this false drops the alpha factor.
  bool singleton_includes_alpha = true;
};

/// No-capture success probability w_{b,l}: the slot is a singleton and the
/// singleton decodes. Each other device at level i transmits wp alpha*pi_i
/// (set include_alpha = false for the bare product over pi_i).
double success_prob_no_capture(int b, const BatteryProfile& profile,
                               const TransmissionPolicy& policy, double alpha,
                               const ChannelParams& ch, bool include_alpha = true);

/// Capture + SIC success probability w_{b,l}: expectation over the
/// binomially transmitting interferers of the event that every
/// higher-energy packet decodes against its own post-SIC interference
/// state and the tagged packet decodes against levels <= b.
double success_prob_capture(int b, const BatteryProfile& profile,
                            const TransmissionPolicy& policy, double alpha,
                            const ChannelParams& ch,
                            const CaptureOptions& opts = {});

/// Profile-averaged success probability w-bar_b over l ~ multinomial(U-1, nu).
/// No-capture uses the closed form (1-eps_b) (sum_i nu_i (1-alpha pi_i))^(U-1);
/// capture averages success_prob_capture, by exact profile enumeration when
/// the space is small and seeded Monte-Carlo sampling otherwise.
double avg_success_prob(int b, const BatteryDistribution& nu, int device_count,
                        const TransmissionPolicy& policy, double alpha,
                        const ChannelParams& ch, DecodingMode mode,
                        const CaptureOptions& opts = {});

/// All of w-bar_1..w-bar_E in one call (shares the sampled profiles across b).
std::vector<double> avg_success_probs(const BatteryDistribution& nu, int device_count,
                                      const TransmissionPolicy& policy, double alpha,
                                      const ChannelParams& ch, DecodingMode mode,
                                      const CaptureOptions& opts = {});

/// S = alpha U sum_b nu_b pi_b w-bar_b, packets decoded per slot.
double throughput(const SystemConfig& config, const TransmissionPolicy& policy,
                  const BatteryDistribution& nu, const std::vector<double>& wbar);

}  // namespace aoi
