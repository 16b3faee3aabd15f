#include "aoi/delivery.hpp"

#include "aoi/rng.hpp"

#include <cmath>
#include <functional>

namespace aoi {

namespace {

constexpr double kLog2e = 1.4426950408889634;  // log2(e)
constexpr double kQArgClamp = 38.0;

/// Shared evaluation path for both error-probability operations. With
/// p_tilde = p_breve = 0 the dispersion reduces to the singleton V(b), so
/// capture_error_prob with no interferers equals singleton_error_prob
/// bit-for-bit.
double error_prob_impl(int b, double p_tilde, double p_breve, const ChannelParams& ch) {
  if (b <= 0) return 1.0;  // zero transmit power cannot carry R > 0
  const double snr = static_cast<double>(b) / ch.noise_energy();
  const double sinr = snr / (p_tilde + 1.0);
  const double capacity = 0.5 * std::log2(1.0 + sinr);
  const double dispersion =
      (snr * snr * (1.0 + 2.0 * p_tilde + p_tilde * p_tilde - p_breve) +
       2.0 * snr * std::pow(p_tilde + 1.0, 3)) /
      (2.0 * (p_tilde + 1.0) * (p_tilde + 1.0) * (snr + p_tilde + 1.0) * (snr + p_tilde + 1.0)) *
      kLog2e * kLog2e;
  if (!(dispersion > 0.0)) return capacity > ch.rate ? 0.0 : 1.0;
  const double arg = std::sqrt(ch.slot_length / dispersion) * (capacity - ch.rate);
  return q_function(arg);
}

double binom_pmf(int k, int n, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double log_pmf = std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) +
                         k * std::log(p) + (n - k) * std::log1p(-p);
  return std::exp(log_pmf);
}

/// Success of the tagged packet (level b) against transmitting interferer
/// counts tx[1..E]: every higher-energy packet decodes against its own
/// post-SIC state, and the tagged packet decodes against levels <= b.
double sic_success_given_transmitters(int b, const std::vector<int>& tx,
                                      const ChannelParams& ch) {
  const int levels = static_cast<int>(tx.size()) - 1;
  InterferenceState state;
  state.transmit_counts.assign(tx.size(), 0);

  // tagged packet: levels > b removed, levels <= b (peers included) present
  for (int i = 1; i <= b && i <= levels; ++i) state.transmit_counts[i] = tx[i];
  double prod = 1.0 - capture_error_prob(b, state, ch);
  if (prod <= 0.0) return 0.0;

  for (int j = levels; j > b; --j) {
    if (tx[j] == 0) continue;
    // state seen by a level-j packet: nothing above j, j-peers minus self,
    // everything below j still present, plus the tagged device at level b
    InterferenceState sj;
    sj.transmit_counts.assign(tx.size(), 0);
    sj.transmit_counts[j] = tx[j] - 1;
    for (int i = 1; i < j; ++i) sj.transmit_counts[i] = tx[i];
    sj.transmit_counts[b] += 1;
    const double eps_j = capture_error_prob(j, sj, ch);
    prod *= std::pow(1.0 - eps_j, tx[j]);
    if (prod <= 0.0) return 0.0;
  }
  return prod;
}

}  // namespace

double q_function(double x) {
  const double clamped = std::clamp(x, -kQArgClamp, kQArgClamp);
  return 0.5 * std::erfc(clamped / std::sqrt(2.0));
}

double InterferenceState::interference_to_noise(const ChannelParams& ch) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < transmit_counts.size(); ++i)
    sum += static_cast<double>(i) * transmit_counts[i];
  return sum / ch.noise_energy();
}

double InterferenceState::sinr(int b, const ChannelParams& ch) const {
  return (static_cast<double>(b) / ch.noise_energy()) / (interference_to_noise(ch) + 1.0);
}

double InterferenceState::second_moment(const ChannelParams& ch) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < transmit_counts.size(); ++i)
    sum += static_cast<double>(i) * static_cast<double>(i) * transmit_counts[i];
  const double ne = ch.noise_energy();
  return sum / (ne * ne);
}

double singleton_error_prob(int b, const ChannelParams& ch) {
  return error_prob_impl(b, 0.0, 0.0, ch);
}

double capture_error_prob(int b, const InterferenceState& interferers,
                          const ChannelParams& ch) {
  return error_prob_impl(b, interferers.interference_to_noise(ch),
                         interferers.second_moment(ch), ch);
}

double success_prob_no_capture(int b, const BatteryProfile& profile,
                               const TransmissionPolicy& policy, double alpha,
                               const ChannelParams& ch, bool include_alpha) {
  const double eps = singleton_error_prob(b, ch);
  double prod = 1.0 - eps;
  for (int i = 1; i <= profile.levels(); ++i) {
    const double tx = include_alpha ? alpha * policy.prob(i) : policy.prob(i);
    prod *= std::pow(1.0 - tx, profile.counts[i]);
  }
  return prod;
}

double success_prob_capture(int b, const BatteryProfile& profile,
                            const TransmissionPolicy& policy, double alpha,
                            const ChannelParams& ch, const CaptureOptions& opts) {
  if (b < 1) throw std::invalid_argument("capture success requires b >= 1");
  const int E = profile.levels();

  // L-bar_i is forced to 0 when alpha*pi_i = 0
  std::vector<double> tx_prob(E + 1, 0.0);
  double support = 1.0;
  for (int i = 1; i <= E; ++i) {
    tx_prob[i] = alpha * policy.prob(i);
    if (tx_prob[i] > 0.0) support *= profile.counts[i] + 1;
  }

  if (support <= static_cast<double>(opts.exact_support_cap)) {
    double total = 0.0;
    std::vector<int> tx(E + 1, 0);
    std::function<void(int, double)> rec = [&](int level, double weight) {
      if (level > E) {
        total += weight * sic_success_given_transmitters(b, tx, ch);
        return;
      }
      if (tx_prob[level] <= 0.0) {
        tx[level] = 0;
        rec(level + 1, weight);
        return;
      }
      for (int k = 0; k <= profile.counts[level]; ++k) {
        tx[level] = k;
        rec(level + 1, weight * binom_pmf(k, profile.counts[level], tx_prob[level]));
      }
    };
    rec(1, 1.0);
    return total;
  }

  Rng rng(opts.seed);
  double sum = 0.0;
  std::vector<int> tx(E + 1, 0);
  for (std::size_t s = 0; s < opts.sampler_budget; ++s) {
    for (int i = 1; i <= E; ++i) tx[i] = rng.binomial(profile.counts[i], tx_prob[i]);
    sum += sic_success_given_transmitters(b, tx, ch);
  }
  return sum / static_cast<double>(opts.sampler_budget);
}

namespace {

constexpr double kExactProfileCap = 3000.0;

std::vector<double> avg_success_probs_capture(const BatteryDistribution& nu,
                                              int device_count,
                                              const TransmissionPolicy& policy,
                                              double alpha, const ChannelParams& ch,
                                              const CaptureOptions& opts) {
  const int E = nu.capacity();
  const int others = device_count - 1;
  std::vector<double> wbar(E + 1, 0.0);

  if (profile_count(others, E) <= kExactProfileCap) {
    ProfileSpace space(others, E);
    for (int idx = 0; idx < space.size(); ++idx) {
      const BatteryProfile& l = space.profile(idx);
      const double pmf = multinomial_profile_pmf(l, nu);
      if (pmf <= 0.0) continue;
      for (int b = 1; b <= E; ++b)
        wbar[b] += pmf * success_prob_capture(b, l, policy, alpha, ch, opts);
    }
    return wbar;
  }

  // Sampled path: draw l ~ multinomial(U-1, nu) via conditional binomials,
  // then the transmitting counts, and reuse each draw for every b.
  Rng rng(opts.seed);
  std::vector<int> counts(E + 1, 0);
  std::vector<int> tx(E + 1, 0);
  for (std::size_t s = 0; s < opts.sampler_budget; ++s) {
    int remaining = others;
    double rest = 1.0;
    for (int i = 0; i < E; ++i) {
      const double p = rest > 0.0 ? std::clamp(nu[i] / rest, 0.0, 1.0) : 0.0;
      counts[i] = rng.binomial(remaining, p);
      remaining -= counts[i];
      rest -= nu[i];
    }
    counts[E] = remaining;
    for (int i = 1; i <= E; ++i) tx[i] = rng.binomial(counts[i], alpha * policy.prob(i));
    for (int b = 1; b <= E; ++b)
      wbar[b] += sic_success_given_transmitters(b, tx, ch);
  }
  for (int b = 1; b <= E; ++b) wbar[b] /= static_cast<double>(opts.sampler_budget);
  return wbar;
}

}  // namespace

std::vector<double> avg_success_probs(const BatteryDistribution& nu, int device_count,
                                      const TransmissionPolicy& policy, double alpha,
                                      const ChannelParams& ch, DecodingMode mode,
                                      const CaptureOptions& opts) {
  const int E = nu.capacity();
  if (policy.capacity() != E) throw std::invalid_argument("policy/nu dimension mismatch");
  if (device_count < 1) throw std::invalid_argument("device_count must be >= 1");

  if (mode == DecodingMode::NoCapture) {
    double idle = 0.0;
    for (int i = 0; i <= E; ++i) {
      const double tx = opts.singleton_includes_alpha ? alpha * policy.prob(i) : policy.prob(i);
      idle += nu[i] * (1.0 - tx);
    }
    const double singleton = std::pow(idle, device_count - 1);
    std::vector<double> wbar(E + 1, 0.0);
    for (int b = 1; b <= E; ++b)
      wbar[b] = (1.0 - singleton_error_prob(b, ch)) * singleton;
    return wbar;
  }
  return avg_success_probs_capture(nu, device_count, policy, alpha, ch, opts);
}

double avg_success_prob(int b, const BatteryDistribution& nu, int device_count,
                        const TransmissionPolicy& policy, double alpha,
                        const ChannelParams& ch, DecodingMode mode,
                        const CaptureOptions& opts) {
  if (b < 1 || b > nu.capacity()) throw std::invalid_argument("b out of range");
  return avg_success_probs(nu, device_count, policy, alpha, ch, mode, opts)[b];
}

double throughput(const SystemConfig& config, const TransmissionPolicy& policy,
                  const BatteryDistribution& nu, const std::vector<double>& wbar) {
  const int E = config.battery_capacity;
  if (nu.capacity() != E || policy.capacity() != E ||
      static_cast<int>(wbar.size()) != E + 1)
    throw std::invalid_argument("throughput input dimension mismatch");
  double sum = 0.0;
  for (int b = 1; b <= E; ++b) sum += nu[b] * policy.prob(b) * wbar[b];
  return config.update_prob * config.device_count * sum;
}

}  // namespace aoi
