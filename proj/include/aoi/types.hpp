#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoi {

/// Thrown when a battery chain has no meaningful stationary distribution
/// (e.g. no harvesting, so mass drains to level 0 forever).
struct DegenerateChainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when the exact ancillary chain would exceed the configured
/// state-space cap.
struct StateSpaceCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when the refresh process never terminates (pi identically zero,
/// or the transmitting states are unreachable).
struct NoRefreshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DecodingMode { NoCapture, Capture };

/// AWGN slot model: a slot is `slot_length` uses of a real-valued channel,
/// updates are sent at `rate` bits per channel use, noise power is linear.
struct ChannelParams {
  int slot_length = 100;
  double rate = 0.8;
  double noise_power = 0.01;

  /// nsigma2 = n * sigma^2; a device at level b transmits with SNR b / nsigma2.
  double noise_energy() const { return slot_length * noise_power; }

  void validate() const {
    if (slot_length < 1) throw std::invalid_argument("slot_length must be >= 1");
    if (!(rate > 0)) throw std::invalid_argument("rate must be > 0");
    if (!(noise_power > 0)) throw std::invalid_argument("noise_power must be > 0");
  }
};

struct SystemConfig {
  int device_count = 1;      // U
  int battery_capacity = 1;  // E, energy units
  double update_prob = 0.1;  // alpha, new reading per slot
  double harvest_prob = 0.1; // eta, one energy unit per slot
  ChannelParams channel;
  DecodingMode decoding_mode = DecodingMode::NoCapture;

  void validate() const {
    if (device_count < 1) throw std::invalid_argument("device_count must be >= 1");
    if (battery_capacity < 1) throw std::invalid_argument("battery_capacity must be >= 1");
    if (update_prob < 0 || update_prob > 1)
      throw std::invalid_argument("update_prob must be in [0,1]");
    if (harvest_prob < 0 || harvest_prob > 1)
      throw std::invalid_argument("harvest_prob must be in [0,1]");
    channel.validate();
  }
};

/// Per-level transmission probabilities (pi_1,...,pi_E); pi_0 is implicitly 0.
struct TransmissionPolicy {
  std::vector<double> probs;

  TransmissionPolicy() = default;
  explicit TransmissionPolicy(std::vector<double> p) : probs(std::move(p)) {
    for (double v : probs)
      if (v < 0 || v > 1) throw std::invalid_argument("policy entries must be in [0,1]");
  }

  int capacity() const { return static_cast<int>(probs.size()); }

  /// prob(0) == 0 by convention.
  double prob(int level) const {
    if (level == 0) return 0.0;
    return probs.at(static_cast<std::size_t>(level - 1));
  }
};

/// Steady-state battery distribution (nu_0,...,nu_E).
struct BatteryDistribution {
  std::vector<double> nu;

  int capacity() const { return static_cast<int>(nu.size()) - 1; }
  double operator[](int level) const { return nu.at(static_cast<std::size_t>(level)); }
};

/// Occupancy counts (L_0,...,L_E) of the other U-1 devices.
struct BatteryProfile {
  std::vector<int> counts;

  BatteryProfile() = default;
  explicit BatteryProfile(std::vector<int> c) : counts(std::move(c)) {}

  int levels() const { return static_cast<int>(counts.size()) - 1; }
  int total() const {
    int t = 0;
    for (int c : counts) t += c;
    return t;
  }
  bool operator==(const BatteryProfile& other) const = default;
};

/// Dense row-stochastic matrix. Rows must sum to 1 within 1e-12.
class StochasticMatrix {
 public:
  explicit StochasticMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("matrix must be square");
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      double row_sum = m_.row(i).sum();
      if (std::abs(row_sum - 1.0) > 1e-12)
        throw std::invalid_argument("row " + std::to_string(i) + " does not sum to 1");
      for (Eigen::Index j = 0; j < m_.cols(); ++j)
        if (m_(i, j) < -1e-15 || m_(i, j) > 1.0 + 1e-15)
          throw std::invalid_argument("entry out of [0,1]");
    }
  }

  int dimension() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

}  // namespace aoi
