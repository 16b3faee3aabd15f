#pragma once

#include "aoi/rng.hpp"
#include "aoi/types.hpp"

#include <cstdint>

namespace aoi {

struct SimParams {
  long long total_slots = 1000000;
  long long warmup_slots = 10000;
  std::uint64_t seed = 1;
  long long theta = 1000;  // AVP threshold, slots
  int batches = 100;       // batch-means blocks for standard errors
  bool check_invariants = false;

  void validate() const {
    if (total_slots <= warmup_slots || warmup_slots < 0)
      throw std::invalid_argument("need total_slots > warmup_slots >= 0");
    if (theta < 1) throw std::invalid_argument("theta must be >= 1");
    if (batches < 2) throw std::invalid_argument("need at least 2 batches");
  }
};

struct SimResult {
  // Time averages of the piecewise-linear age process: the slot-sampled
  // age (1 on the delivery slot, +1 per slot otherwise) plus one half,
  // and the fraction of time above theta, which is the fraction of slots
  // with sampled age >= theta. These match the analytical conventions
  // avg = 1 + E[Y^2]/(2 E[Y]) and the (y - theta + 1)+ cycle count.
  double avg_aoi = 0.0;
  double avp = 0.0;
  double throughput = 0.0;  // decoded packets per slot
  double avg_aoi_se = 0.0;
  double avp_se = 0.0;
  double throughput_se = 0.0;

  // Inter-refresh samples pooled over devices, post warmup.
  std::vector<long long> refresh_histogram;  // index y, count of Y == y
  long long refresh_count = 0;
  double mean_refresh = 0.0;
  double mean_refresh_sq = 0.0;
  double mean_refresh_se = 0.0;

  bool operator==(const SimResult& other) const = default;
};

struct Transmission {
  int device;
  int energy;  // b >= 1
};

/// One slot of receiver processing. NoCapture: decode only a singleton,
/// success wp 1 - eps_b. Capture: SIC from the highest energy level down;
/// packets at one level are decoded independently against the same
/// interference state (levels above removed, levels at or below present,
/// self excluded) and any failure at a level stops everything below it.
std::vector<int> decode_slot(const std::vector<Transmission>& transmissions,
                             DecodingMode mode, const ChannelParams& ch, Rng& rng);

/// Slot-accurate simulation of the full protocol. Per device and slot the
/// draws are, in this order: reading arrival, transmit decision, harvest;
/// each device owns a substream of the seed, and the receiver owns one
/// more, so results are bit-identical for a given seed.
SimResult simulate(const SystemConfig& config, const TransmissionPolicy& policy,
                   const SimParams& params);

}  // namespace aoi
