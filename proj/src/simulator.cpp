#include "aoi/simulator.hpp"

#include "aoi/delivery.hpp"

#include <algorithm>
#include <cmath>

namespace aoi {

std::vector<int> decode_slot(const std::vector<Transmission>& transmissions,
                             DecodingMode mode, const ChannelParams& ch, Rng& rng) {
  std::vector<int> decoded;
  if (transmissions.empty()) return decoded;

  if (mode == DecodingMode::NoCapture) {
    if (transmissions.size() != 1) return decoded;
    const double eps = singleton_error_prob(transmissions[0].energy, ch);
    if (rng.bernoulli(1.0 - eps)) decoded.push_back(transmissions[0].device);
    return decoded;
  }

  int max_level = 0;
  for (const auto& t : transmissions) max_level = std::max(max_level, t.energy);
  std::vector<int> present(max_level + 1, 0);
  for (const auto& t : transmissions) present[t.energy]++;

  for (int level = max_level; level >= 1; --level) {
    if (present[level] == 0) continue;
    InterferenceState state;
    state.transmit_counts = present;
    state.transmit_counts[level] -= 1;  // self excluded, peers included
    const double eps = capture_error_prob(level, state, ch);

    bool all_ok = true;
    for (const auto& t : transmissions) {
      if (t.energy != level) continue;
      if (rng.bernoulli(1.0 - eps))
        decoded.push_back(t.device);
      else
        all_ok = false;
    }
    if (!all_ok) break;    // lower-energy packets are never attempted
    present[level] = 0;    // level removed as a block
  }
  return decoded;
}

SimResult simulate(const SystemConfig& config, const TransmissionPolicy& policy,
                   const SimParams& params) {
  config.validate();
  params.validate();
  const int U = config.device_count;
  const int E = config.battery_capacity;
  if (policy.capacity() != E)
    throw std::invalid_argument("policy length does not match battery capacity");
  const double alpha = config.update_prob;
  const double eta = config.harvest_prob;

  Rng root(params.seed);
  std::vector<Rng> device_rng;
  device_rng.reserve(U);
  for (int d = 0; d < U; ++d) device_rng.push_back(root.fork(d));
  Rng decoder_rng = root.fork(static_cast<std::uint64_t>(U) + 1);

  std::vector<int> battery(U, 0);
  std::vector<long long> age(U, 1);
  std::vector<long long> slots_since_refresh(U, 0);

  const long long measured = params.total_slots - params.warmup_slots;
  const long long batch_len = std::max<long long>(1, measured / params.batches);

  std::vector<double> batch_age, batch_violation, batch_decoded;
  double acc_age = 0.0, acc_violation = 0.0, acc_decoded = 0.0;
  long long acc_slots = 0;

  SimResult result;
  double refresh_sum = 0.0, refresh_sq_sum = 0.0;
  std::vector<double> batch_refresh_mean;
  double batch_refresh_sum = 0.0;
  long long batch_refresh_count = 0;

  std::vector<Transmission> transmissions;

  for (long long slot = 0; slot < params.total_slots; ++slot) {
    const bool measuring = slot >= params.warmup_slots;

    transmissions.clear();
    for (int d = 0; d < U; ++d) {
      Rng& rng = device_rng[d];
      const bool reading = rng.bernoulli(alpha);
      const bool tx_decision = rng.bernoulli(policy.prob(battery[d]));
      const bool harvest = rng.bernoulli(eta);

      const bool transmits = reading && battery[d] > 0 && tx_decision;
      if (transmits) {
        transmissions.push_back({d, battery[d]});
        battery[d] = 0;  // all available energy is spent
      } else if (battery[d] < E && harvest) {
        battery[d] += 1;
      }
      if (params.check_invariants) {
        if (battery[d] < 0 || battery[d] > E)
          throw std::logic_error("battery out of range");
        if (transmits && battery[d] != 0)
          throw std::logic_error("transmitting device kept or harvested energy");
      }
    }

    const std::vector<int> decoded =
        decode_slot(transmissions, config.decoding_mode, config.channel, decoder_rng);

    std::vector<bool> delivered(U, false);
    for (int d : decoded) delivered[d] = true;
    long long violations = 0;
    long long age_sum = 0;
    for (int d = 0; d < U; ++d) {
      slots_since_refresh[d] += 1;
      if (delivered[d]) {
        if (measuring) {
          refresh_sum += static_cast<double>(slots_since_refresh[d]);
          refresh_sq_sum += static_cast<double>(slots_since_refresh[d]) *
                            static_cast<double>(slots_since_refresh[d]);
          batch_refresh_sum += static_cast<double>(slots_since_refresh[d]);
          batch_refresh_count += 1;
          result.refresh_count += 1;
          const auto y = static_cast<std::size_t>(slots_since_refresh[d]);
          if (result.refresh_histogram.size() <= y) result.refresh_histogram.resize(y + 1, 0);
          result.refresh_histogram[y] += 1;
        }
        slots_since_refresh[d] = 0;
        age[d] = 1;
      } else {
        age[d] += 1;
      }
      age_sum += age[d];
      if (age[d] >= params.theta) violations += 1;
    }

    if (measuring) {
      acc_age += static_cast<double>(age_sum) / U;
      acc_violation += static_cast<double>(violations) / U;
      acc_decoded += static_cast<double>(decoded.size());
      acc_slots += 1;
      if (acc_slots == batch_len &&
          static_cast<long long>(batch_age.size()) < params.batches) {
        batch_age.push_back(acc_age / acc_slots);
        batch_violation.push_back(acc_violation / acc_slots);
        batch_decoded.push_back(acc_decoded / acc_slots);
        batch_refresh_mean.push_back(
            batch_refresh_count > 0 ? batch_refresh_sum / batch_refresh_count : 0.0);
        acc_age = acc_violation = acc_decoded = 0.0;
        acc_slots = 0;
        batch_refresh_sum = 0.0;
        batch_refresh_count = 0;
      }
    }
  }

  auto batch_stats = [](const std::vector<double>& batches, double& mean, double& se) {
    const auto n = static_cast<double>(batches.size());
    double sum = 0.0;
    for (double b : batches) sum += b;
    mean = sum / n;
    double var = 0.0;
    for (double b : batches) var += (b - mean) * (b - mean);
    var /= (n - 1.0);
    se = std::sqrt(var / n);
  };

  double mean_sampled_age = 0.0;
  batch_stats(batch_age, mean_sampled_age, result.avg_aoi_se);
  result.avg_aoi = mean_sampled_age + 0.5;  // piecewise-linear time average
  batch_stats(batch_violation, result.avp, result.avp_se);
  batch_stats(batch_decoded, result.throughput, result.throughput_se);

  if (result.refresh_count > 0) {
    result.mean_refresh = refresh_sum / static_cast<double>(result.refresh_count);
    result.mean_refresh_sq = refresh_sq_sum / static_cast<double>(result.refresh_count);
    double m, se;
    batch_stats(batch_refresh_mean, m, se);
    result.mean_refresh_se = se;
  }
  return result;
}

}  // namespace aoi
