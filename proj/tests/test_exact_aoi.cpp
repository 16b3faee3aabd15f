#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aoi/approx_aoi.hpp"
#include "aoi/exact_aoi.hpp"
#include "aoi/rng.hpp"

#include <cmath>

using namespace aoi;

namespace {

SystemConfig make_config(int U, int E, double alpha, double eta) {
  SystemConfig c;
  c.device_count = U;
  c.battery_capacity = E;
  c.update_prob = alpha;
  c.harvest_prob = eta;
  return c;
}

/// Channel where a single energy unit already decodes with eps < 1e-12.
ChannelParams strong_channel() {
  ChannelParams ch;
  ch.slot_length = 100;
  ch.rate = 0.8;
  ch.noise_power = 1e-6;
  return ch;
}

}  // namespace

TEST_CASE("chain dimensions and conservation") {
  SystemConfig cfg = make_config(4, 2, 0.3, 0.2);
  TransmissionPolicy pi({0.4, 0.9});
  AncillaryChain chain(cfg, pi, {});

  CHECK(chain.profiles().size() == 10);  // C(5,2)
  CHECK(chain.state_count() == 30);

  // every F-state either stays in F or absorbs: Q 1 + r = 1
  Eigen::VectorXd total =
      chain.q() * Eigen::VectorXd::Ones(chain.state_count()) + chain.r();
  for (int s = 0; s < chain.state_count(); ++s)
    CHECK(total(s) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(chain.initial_distribution().sum() == doctest::Approx(1.0).epsilon(1e-12));
  // the first post-refresh battery is 0 or 1, never higher
  for (int b = 2; b <= 2; ++b)
    for (int l = 0; l < chain.profiles().size(); ++l)
      CHECK(chain.initial_distribution()(chain.state_index(b, l)) == 0.0);
}

TEST_CASE("per-state success probabilities match the delivery layer") {
  SystemConfig cfg = make_config(3, 2, 0.5, 0.3);
  TransmissionPolicy pi({0.6, 1.0});

  for (DecodingMode mode : {DecodingMode::NoCapture, DecodingMode::Capture}) {
    cfg.decoding_mode = mode;
    AncillaryChain chain(cfg, pi, {});
    for (int b = 1; b <= 2; ++b)
      for (int l = 0; l < chain.profiles().size(); ++l) {
        const BatteryProfile& profile = chain.profiles().profile(l);
        const double expected =
            mode == DecodingMode::NoCapture
                ? success_prob_no_capture(b, profile, pi, 0.5, cfg.channel)
                : success_prob_capture(b, profile, pi, 0.5, cfg.channel);
        CHECK(chain.success_prob()(chain.state_index(b, l)) ==
              doctest::Approx(expected).epsilon(1e-13));
        CHECK(chain.r()(chain.state_index(b, l)) ==
              doctest::Approx(0.5 * pi.prob(b) * expected).epsilon(1e-13));
      }
  }
}

TEST_CASE("perfect-decoding single unit gives mean 1/eta + 1/alpha") {
  for (auto [alpha, eta] : {std::pair{0.3, 0.2}, std::pair{0.05, 0.9}, std::pair{0.6, 0.45}}) {
    SystemConfig cfg = make_config(1, 1, alpha, eta);
    cfg.channel = strong_channel();
    AncillaryChain chain(cfg, TransmissionPolicy({1.0}), {});
    auto [mean, second] = inter_refresh_moments_exact(chain);
    CHECK(mean == doctest::Approx(1.0 / eta + 1.0 / alpha).epsilon(1e-9));

    const double var = (1 - eta) / (eta * eta) + (1 - alpha) / (alpha * alpha);
    CHECK(second - mean * mean == doctest::Approx(var).epsilon(1e-7));
  }
}

TEST_CASE("single device: exact and approximate analyses coincide") {
  // With U = 1 there is no interference, so the averaged success equals the
  // per-profile one and the approximation drops nothing.
  Rng rng(321);
  for (int t = 0; t < 25; ++t) {
    const int E = 1 + static_cast<int>(rng.next_u64() % 3);
    std::vector<double> pi(E);
    for (double& p : pi) p = 0.1 + 0.9 * rng.next_double();
    SystemConfig cfg = make_config(1, E, 0.05 + 0.9 * rng.next_double(),
                                   0.05 + 0.9 * rng.next_double());
    cfg.decoding_mode = rng.bernoulli(0.5) ? DecodingMode::Capture : DecodingMode::NoCapture;
    TransmissionPolicy policy(pi);

    auto chain = build_ancillary_chain(cfg, policy, {});
    auto [mean_e, second_e] = inter_refresh_moments_exact(chain);

    auto m = approx_metrics(cfg, policy, 10);
    CHECK(mean_e == doctest::Approx(m.mean_y).epsilon(1e-10));
    CHECK(second_e == doctest::Approx(m.mean_y2).epsilon(1e-10));
    CHECK(exact_avg_aoi(cfg, policy) == doctest::Approx(m.avg_aoi).epsilon(1e-10));
  }
}

TEST_CASE("exact and approximate stay close at moderate contention") {
  SystemConfig cfg = make_config(10, 2, 0.1, 0.05);
  TransmissionPolicy pi({0.0, 1.0});
  const double exact = exact_avg_aoi(cfg, pi);
  const double approx = approx_metrics(cfg, pi, 10).avg_aoi;
  CHECK(std::abs(exact - approx) / exact < 0.05);
}

TEST_CASE("state-space cap is enforced") {
  SystemConfig cfg = make_config(1000, 8, 0.01, 0.01);
  TransmissionPolicy pi(std::vector<double>(8, 1.0));
  CHECK_THROWS_AS(build_ancillary_chain(cfg, pi, {}), StateSpaceCapError);

  ExactOptions loose;
  loose.state_space_cap = 1e3;
  SystemConfig small = make_config(4, 2, 0.3, 0.2);
  TransmissionPolicy pi2({0.5, 0.5});
  CHECK_NOTHROW(build_ancillary_chain(small, pi2, loose));
  loose.state_space_cap = 10;
  CHECK_THROWS_AS(build_ancillary_chain(small, pi2, loose), StateSpaceCapError);
}

TEST_CASE("never-transmitting policy raises NoRefreshError") {
  SystemConfig cfg = make_config(2, 2, 0.4, 0.3);
  AncillaryChain chain(cfg, TransmissionPolicy({0.0, 0.0}), {});
  CHECK_THROWS_AS(inter_refresh_moments_exact(chain), NoRefreshError);
}
