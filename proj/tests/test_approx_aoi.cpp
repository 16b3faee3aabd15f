#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aoi/approx_aoi.hpp"
#include "aoi/model_core.hpp"
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

PhaseTypeModel random_model(Rng& rng) {
  const int E = 1 + static_cast<int>(rng.next_u64() % 3);
  std::vector<double> pi(E), wbar(E + 1, 0.0);
  for (double& p : pi) p = 0.2 + 0.8 * rng.next_double();
  for (int b = 1; b <= E; ++b) wbar[b] = 0.3 + 0.7 * rng.next_double();
  const double alpha = 0.1 + 0.8 * rng.next_double();
  const double eta = 0.1 + 0.8 * rng.next_double();
  return build_phase_type(make_config(1, E, alpha, eta), TransmissionPolicy(pi), wbar);
}

long long pmf_horizon(const PhaseTypeModel& model, double tail = 1e-13) {
  long long y = 16;
  while (inter_refresh_ccdf(model, y) > tail && y < (1LL << 22)) y *= 2;
  return y;
}

}  // namespace

TEST_CASE("phase-type structure for E=2") {
  const double alpha = 0.4, eta = 0.25;
  TransmissionPolicy pi({0.5, 0.8});
  std::vector<double> wbar = {0.0, 0.6, 0.9};
  auto m = build_phase_type(make_config(3, 2, alpha, eta), pi, wbar);

  CHECK(m.T(0, 0) == doctest::Approx(1 - eta));
  CHECK(m.T(0, 1) == doctest::Approx(eta));
  CHECK(m.t0(0) == 0.0);

  const double tx1 = alpha * 0.5;
  CHECK(m.T(1, 0) == doctest::Approx(tx1 * (1 - 0.6)));
  CHECK(m.T(1, 1) == doctest::Approx((1 - eta) * (1 - tx1)));
  CHECK(m.T(1, 2) == doctest::Approx(eta * (1 - tx1)));
  CHECK(m.t0(1) == doctest::Approx(tx1 * 0.6));

  const double tx2 = alpha * 0.8;
  CHECK(m.T(2, 0) == doctest::Approx(tx2 * (1 - 0.9)));
  CHECK(m.T(2, 2) == doctest::Approx(1 - tx2));
  CHECK(m.t0(2) == doctest::Approx(tx2 * 0.9));

  // conservation: T 1 + t0 = 1
  Eigen::VectorXd total = m.T * Eigen::VectorXd::Ones(3) + m.t0;
  for (int i = 0; i < 3; ++i) CHECK(total(i) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conservation holds on random models") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    auto m = random_model(rng);
    Eigen::VectorXd total = m.T * Eigen::VectorXd::Ones(m.T.rows()) + m.t0;
    for (Eigen::Index i = 0; i < total.size(); ++i)
      CHECK(total(i) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("perfect-decoding single unit: mean refresh is 1/eta + 1/alpha") {
  // From an empty battery: a geometric(eta) wait for one energy unit, then
  // a geometric(alpha) wait for a reading (harvesting pauses at the full
  // one-unit battery, so the two phases never overlap).
  for (auto [alpha, eta] : {std::pair{0.3, 0.2}, std::pair{0.05, 0.9}, std::pair{0.7, 0.7}}) {
    auto m = build_phase_type(make_config(1, 1, alpha, eta), TransmissionPolicy({1.0}),
                              {0.0, 1.0});
    auto [mean, second] = inter_refresh_moments(m);
    CHECK(mean == doctest::Approx(1.0 / eta + 1.0 / alpha).epsilon(1e-12));

    // sum of two independent geometrics: Var = (1-eta)/eta^2 + (1-alpha)/alpha^2
    const double var = (1 - eta) / (eta * eta) + (1 - alpha) / (alpha * alpha);
    CHECK(second - mean * mean == doctest::Approx(var).epsilon(1e-10));
  }
}

TEST_CASE("pmf of the two-geometric convolution") {
  const double alpha = 0.4, eta = 0.3;
  auto m = build_phase_type(make_config(1, 1, alpha, eta), TransmissionPolicy({1.0}),
                            {0.0, 1.0});
  for (long long y = 2; y <= 40; ++y) {
    double conv = 0.0;
    for (long long k = 1; k < y; ++k)
      conv += eta * std::pow(1 - eta, k - 1) * alpha * std::pow(1 - alpha, y - k - 1);
    CHECK(inter_refresh_pmf(m, y) == doctest::Approx(conv).epsilon(1e-12));
  }
  CHECK(inter_refresh_pmf(m, 1) == doctest::Approx(0.0));
}

TEST_CASE("pmf table matches single-point evaluation and sums to one") {
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    auto m = random_model(rng);
    const long long horizon = pmf_horizon(m);
    auto table = inter_refresh_pmf_table(m, horizon);
    REQUIRE(static_cast<long long>(table.size()) == horizon);
    for (long long y : {1LL, 2LL, 5LL, horizon / 2, horizon})
      CHECK(table[static_cast<std::size_t>(y - 1)] ==
            doctest::Approx(inter_refresh_pmf(m, y)).epsilon(1e-12));

    double sum = 0.0;
    for (double p : table) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("ccdf is consistent with the pmf") {
  Rng rng(31);
  auto m = random_model(rng);
  auto table = inter_refresh_pmf_table(m, 200);
  double tail = 1.0;
  for (long long y = 1; y <= 200; ++y) {
    CHECK(inter_refresh_ccdf(m, y) == doctest::Approx(tail).epsilon(1e-11));
    tail -= table[static_cast<std::size_t>(y - 1)];
  }
}

TEST_CASE("closed-form moments match truncated sums") {
  Rng rng(47);
  for (int t = 0; t < 20; ++t) {
    auto m = random_model(rng);
    auto [mean, second] = inter_refresh_moments(m);
    const long long horizon = pmf_horizon(m);
    auto table = inter_refresh_pmf_table(m, horizon);
    double s1 = 0.0, s2 = 0.0;
    for (long long y = horizon; y >= 1; --y) {  // small-to-large accumulation
      const double p = table[static_cast<std::size_t>(y - 1)];
      s1 += static_cast<double>(y) * p;
      s2 += static_cast<double>(y) * static_cast<double>(y) * p;
    }
    CHECK(mean == doctest::Approx(s1).epsilon(1e-8));
    CHECK(second == doctest::Approx(s2).epsilon(1e-8));
  }
}

TEST_CASE("both average-age closed forms agree") {
  Rng rng(53);
  for (int t = 0; t < 30; ++t) {
    auto m = random_model(rng);
    auto [mean, second] = inter_refresh_moments(m);
    CHECK(approx_avg_aoi(m) ==
          doctest::Approx(1.0 + second / (2.0 * mean)).epsilon(1e-12));
  }
}

TEST_CASE("avp equals the definition oracle") {
  Rng rng(61);
  for (int t = 0; t < 15; ++t) {
    auto m = random_model(rng);
    auto [mean, second] = inter_refresh_moments(m);
    const long long horizon = pmf_horizon(m);
    auto table = inter_refresh_pmf_table(m, horizon);
    for (long long theta : {1LL, 2LL, 3LL, 10LL, 37LL, 100LL}) {
      double excess = 0.0;
      for (long long y = theta; y <= horizon; ++y)
        excess += static_cast<double>(y - theta + 1) * table[static_cast<std::size_t>(y - 1)];
      CHECK(std::abs(avp(m, theta) - excess / mean) < 1e-9);
    }
  }
}

TEST_CASE("avp boundary conventions") {
  Rng rng(67);
  auto m = random_model(rng);
  CHECK(avp(m, 1) == 1.0);
  CHECK_THROWS_AS(avp(m, 0), std::invalid_argument);
  // a huge threshold must clamp into [0,1] instead of going negative
  const double far = avp(m, 100000);
  CHECK(far >= 0.0);
  CHECK(far <= 1.0);
}

TEST_CASE("non-terminating models raise NoRefreshError") {
  auto never = build_phase_type(make_config(1, 1, 0.5, 0.2), TransmissionPolicy({0.0}),
                                {0.0, 1.0});
  CHECK_THROWS_AS(inter_refresh_moments(never), NoRefreshError);
  CHECK_THROWS_AS(approx_avg_aoi(never), NoRefreshError);
  CHECK_THROWS_AS(avp(never, 10), NoRefreshError);

  auto no_decode = build_phase_type(make_config(1, 1, 0.5, 0.2), TransmissionPolicy({1.0}),
                                    {0.0, 0.0});
  CHECK_THROWS_AS(inter_refresh_moments(no_decode), NoRefreshError);
}

TEST_CASE("approx_metrics composes the pipeline pieces") {
  SystemConfig cfg = make_config(4, 2, 0.3, 0.2);
  TransmissionPolicy pi({0.4, 0.9});
  const long long theta = 20;

  auto out = approx_metrics(cfg, pi, theta);

  auto m1 = m1_transition_matrix(cfg, pi);
  auto nu = battery_steady_state(m1);
  auto wbar = avg_success_probs(nu, cfg.device_count, pi, cfg.update_prob, cfg.channel,
                                cfg.decoding_mode);
  auto model = build_phase_type(cfg, pi, wbar);
  auto [mean, second] = inter_refresh_moments(model);

  for (int i = 0; i <= 2; ++i) CHECK(out.nu[i] == doctest::Approx(nu[i]).epsilon(1e-14));
  for (int b = 1; b <= 2; ++b) CHECK(out.wbar[b] == doctest::Approx(wbar[b]).epsilon(1e-14));
  CHECK(out.mean_y == doctest::Approx(mean).epsilon(1e-14));
  CHECK(out.mean_y2 == doctest::Approx(second).epsilon(1e-14));
  CHECK(out.avg_aoi == doctest::Approx(approx_avg_aoi(model)).epsilon(1e-12));
  CHECK(out.avp == doctest::Approx(avp(model, theta)).epsilon(1e-12));
  CHECK(out.throughput ==
        doctest::Approx(throughput(cfg, pi, nu, wbar)).epsilon(1e-14));
}

TEST_CASE("capture mode never hurts the approximate age") {
  SystemConfig cfg = make_config(12, 2, 0.5, 0.1);
  TransmissionPolicy pi({1.0, 1.0});
  auto no_capture = approx_metrics(cfg, pi, 1000);
  cfg.decoding_mode = DecodingMode::Capture;
  auto capture = approx_metrics(cfg, pi, 1000);
  CHECK(capture.avg_aoi <= no_capture.avg_aoi + 1e-9);
  CHECK(capture.throughput >= no_capture.throughput - 1e-9);
}
