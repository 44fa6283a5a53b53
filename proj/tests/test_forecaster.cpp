#include "aplf/features.hpp"
#include "aplf/forecaster.hpp"
#include "aplf/oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace aplf;

namespace {

GaussianChannelParams channel(std::initializer_list<double> eta, double sigma) {
  GaussianChannelParams p;
  p.eta.resize(static_cast<Eigen::Index>(eta.size()));
  Eigen::Index i = 0;
  for (double x : eta) p.eta[i++] = x;
  p.sigma = sigma;
  return p;
}

double density(double x, double mean, double std) {
  const double z = (x - mean) / std;
  return std::exp(-0.5 * z * z) / (std * std::sqrt(2.0 * M_PI));
}

Timestamp tuesday(int hour) {
  return make_timestamp(std::chrono::sys_days{std::chrono::year{2024} / 1 / 2}, hour);
}

// Marks one calendar type trained with the given channels.
void set_type(OnlineModel& m, int c, const GaussianChannelParams& s, const GaussianChannelParams& r) {
  m.params[CalendarType{c}].s_channel = s;
  m.params[CalendarType{c}].r_channel = r;
  m.state[CalendarType{c}].s_state.gamma = 1.0;
  m.state[CalendarType{c}].r_state.gamma = 1.0;
}

InstanceVector instance_from(int anchor_hour, double anchor, int length) {
  InstanceVector inst{tuesday(anchor_hour), anchor, {}};
  for (int i = 1; i <= length; ++i) {
    const Timestamp t = tuesday(anchor_hour).plus_minutes(60 * i);
    inst.steps.push_back({t, calendar_type(t, {}), std::nullopt, std::nullopt});
  }
  return inst;
}

// Inverse of Phi by bisection on erfc, the reference for normal_quantile.
double quantile_by_bisection(double p) {
  double lo = -40, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("forecaster") {
  TEST_CASE("gaussian product split examples") {
    const GaussianSplit g = gaussian_product_split(0, 1, 1, 1, 2);
    CHECK(g.posterior_mean == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.posterior_std == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(g.marginal_mean == 0.0);
    CHECK(g.marginal_std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    const GaussianSplit d = gaussian_product_split(3, 0, 2, 1.5, 7);
    CHECK(d.posterior_mean == 3.0);
    CHECK(d.posterior_std == 0.0);
    CHECK(d.marginal_mean == 6.0);
    CHECK(d.marginal_std == 1.5);
  }

  TEST_CASE("gaussian product split preserves the joint density") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> pos(0.3, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
      const double a = n(rng), b = pos(rng), alpha = n(rng), beta = pos(rng), y = 2 * n(rng);
      const GaussianSplit g = gaussian_product_split(a, b, alpha, beta, y);
      for (int k = 0; k < 20; ++k) {
        const double x = a + 3 * b * n(rng);
        const double lhs = density(x, a, b) * density(y, alpha * x, beta);
        const double rhs = density(x, g.posterior_mean, g.posterior_std) *
                           density(y, g.marginal_mean, g.marginal_std);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * lhs);
      }
    }
  }

  TEST_CASE("symmetric fusion at the first step") {
    const ForecastPoint prev{5.0, 0.0, 0, {}};
    const auto s = channel({2, 0}, 1.0);
    const auto r = channel({4, 0, 0}, 1.0);
    const ForecastPoint p = forecast_step(prev, s, &r, neutral_observation());
    CHECK(p.mean == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(p.std == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(p.step == 1);
  }

  TEST_CASE("uninformative observation channel reduces to propagation") {
    const ForecastPoint prev{10.0, 2.0, 3, {}};
    const auto s = channel({1, 0.5}, 1.5);
    const auto r = channel({100, 0, 0}, 1e12);
    const ForecastPoint p = forecast_step(prev, s, &r, neutral_observation());
    CHECK(p.mean == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(p.std == doctest::Approx(std::sqrt(1.5 * 1.5 + 0.25 * 4.0)).epsilon(1e-12));
    const ForecastPoint q = forecast_step(prev, s, nullptr, neutral_observation());
    CHECK(q.mean == 6.0);
    CHECK(q.std == doctest::Approx(std::sqrt(1.5 * 1.5 + 0.25 * 4.0)).epsilon(1e-15));
  }

  TEST_CASE("degenerate variances") {
    const ForecastPoint prev{1.0, 0.0, 0, {}};
    const auto s = channel({0, 1}, 0.0);
    const auto r = channel({1, 0, 0}, 0.0);
    CHECK_THROWS_AS(forecast_step(prev, s, &r, neutral_observation()), DegenerateVariances);
  }

  TEST_CASE("random chains match the exact filter") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      const auto steps = oracle::random_filter_steps(rng, 5);
      const auto ref = oracle::exact_filter(1.5, steps);
      ForecastPoint p{1.5, 0.0, 0, {}};
      for (std::size_t i = 0; i < steps.size(); ++i) {
        p = forecast_step(p, steps[i].s_params, &steps[i].r_params, steps[i].u_r);
        CHECK(std::abs(p.mean - ref[i].mean) <= 1e-10 * std::max(1.0, std::abs(ref[i].mean)));
        CHECK(std::abs(p.std - ref[i].std) <= 1e-10 * std::max(1.0, ref[i].std));
      }
    }
  }

  TEST_CASE("predict on the single-step example") {
    HyperParams hp;
    OnlineModel m(hp, kObservationFeatures);
    set_type(m, 12, channel({2, 0}, 1.0), channel({4, 0, 0}, 1.0));
    const Prediction pr = predict(m, instance_from(10, 7.0, 1), hp);
    REQUIRE(pr.path.points.size() == 1);
    CHECK(pr.path.points[0].mean == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(pr.path.points[0].std == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(pr.path.points[0].time == tuesday(11));
    CHECK(pr.fallbacks.empty());
  }

  TEST_CASE("24-step path on a trained model matches the exact filter") {
    HyperParams hp;
    hp.lambda_s = 0.9;
    hp.lambda_r = 0.9;
    OnlineModel m(hp, kObservationFeatures);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    double prev = 100;
    for (int d = 0; d < 30; ++d) {
      for (int h = 0; h < 24; ++h) {
        const Timestamp t = tuesday(h);
        const StepObservation st{t, calendar_type(t, {}), 60 + 25 * n(rng), std::nullopt};
        const std::optional<double> s = 100 + 20 * std::sin(h / 4.0) + 3 * n(rng);
        learn_sequence(m, prev, std::span(&st, 1), std::span(&s, 1), hp);
        prev = *s;
      }
    }
    InstanceVector inst = instance_from(11, prev, 24);
    std::vector<oracle::FilterStep> steps;
    for (auto& st : inst.steps) {
      st.temperature = 60 + 25 * n(rng);
      const auto& e = m.params[st.type];
      steps.push_back({e.s_channel, e.r_channel, observation_features(st.temperature, st.type, m.tracker, hp)});
    }
    const Prediction pr = predict(m, inst, hp);
    const auto ref = oracle::exact_filter(prev, steps);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(std::abs(pr.path.points[i].mean - ref[i].mean) <= 1e-9 * std::max(1.0, std::abs(ref[i].mean)));
      CHECK(std::abs(pr.path.points[i].std - ref[i].std) <= 1e-9 * std::max(1.0, ref[i].std));
    }
  }

  TEST_CASE("constant noiseless pattern is reproduced with vanishing spread") {
    HyperParams hp;
    OnlineModel m(hp, kObservationFeatures);
    for (int d = 0; d < 40; ++d) {
      std::vector<StepObservation> steps;
      std::vector<std::optional<double>> targets;
      for (int h = 0; h < 24; ++h) {
        const Timestamp t = tuesday(h);
        steps.push_back({t, calendar_type(t, {}), std::nullopt, std::nullopt});
        targets.push_back(50.0);
      }
      learn_sequence(m, 50.0, steps, targets, hp);
    }
    const Prediction pr = predict(m, instance_from(11, 50.0, 24), hp);
    for (const ForecastPoint& p : pr.path.points) {
      CHECK(p.mean == doctest::Approx(50.0).epsilon(1e-9));
      CHECK(p.std < 1e-2);
    }
  }

  TEST_CASE("cold start fallbacks") {
    HyperParams hp;
    OnlineModel m(hp, kObservationFeatures);
    CHECK_THROWS_AS(predict(m, instance_from(11, 1.0, 2), hp), ColdStart);

    // Only weekend hour 11 (type 36) has a trained load channel.
    m.params[CalendarType{36}].s_channel = channel({1, 0}, 1.0);
    m.state[CalendarType{36}].s_state.gamma = 1.0;
    const Prediction pr = predict(m, instance_from(10, 1.0, 1), hp);
    REQUIRE(pr.fallbacks.size() == 1);
    CHECK(pr.fallbacks[0].requested.index() == 12);
    CHECK(pr.fallbacks[0].used.index() == 36);
    CHECK_FALSE(pr.fallbacks[0].observation_channel);
    CHECK(pr.unconditioned_steps == 1);
    CHECK(pr.path.points[0].mean == 1.0);

    // Hour 10 and hour 12 of the same class beat hour 11 of the other class at distance 1.
    set_type(m, 11, channel({2, 0}, 1.0), channel({2, 0, 0}, 1.0));
    set_type(m, 13, channel({3, 0}, 1.0), channel({3, 0, 0}, 1.0));
    const Prediction near = predict(m, instance_from(10, 1.0, 1), hp);
    CHECK(near.fallbacks[0].used.index() == 36);
    CHECK(near.fallbacks[1].used.index() == 11);
    CHECK(near.fallbacks[1].observation_channel);
    CHECK(near.unconditioned_steps == 0);

    PredictOptions strict;
    strict.cold_start_fallback = false;
    CHECK_THROWS_AS(predict(m, instance_from(10, 1.0, 1), hp, strict), ColdStart);
    CHECK_NOTHROW(predict(m, instance_from(9, 1.0, 1), hp, strict));
  }

  TEST_CASE("quantile examples") {
    CHECK(quantile({10.0, 0.0, 1, {}}, 0.99) == 10.0);
    CHECK(quantile({0.0, 1.0, 1, {}}, 0.5) == 0.0);
    CHECK(quantile({0.0, 1.0, 1, {}}, 0.975) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(quantile({2.0, 3.0, 1, {}}, 0.975) == doctest::Approx(2.0 + 3.0 * 1.9599639845400538556).epsilon(1e-15));
    CHECK_THROWS_AS(quantile({0.0, 1.0, 1, {}}, 0.0), QOutOfRange);
    CHECK_THROWS_AS(quantile({0.0, 1.0, 1, {}}, 1.0), QOutOfRange);
    CHECK_THROWS_AS(quantile({0.0, 1.0, 1, {}}, std::nan("")), QOutOfRange);
  }

  TEST_CASE("normal quantile against high-precision values") {
    // 20-digit values from arbitrary-precision arithmetic, evaluated at the
    // exact binary value of each double p.
    const std::pair<double, double> table[] = {
        {1e-300, -37.047096299361199237},  {1e-20, -9.2623400897984075796},
        {1e-10, -6.3613409024040561991},   {0.001, -3.0902323061678135354},
        {0.01, -2.3263478740408410931},    {0.02425, -1.9729610513118848376},
        {0.075, -1.4395314709384559349},   {0.3, -0.52440051270804081597},
        {0.5, 0.0},                        {0.7, 0.52440051270804065631},
        {0.925, 1.4395314709384562291},    {0.975, 1.9599639845400538556},
        {0.99, 2.3263478740408407676},     {0.999999, 4.7534243088170877657},
    };
    for (const auto& [p, x] : table) {
      CAPTURE(p);
      CHECK(std::abs(normal_quantile(p) - x) <= 1e-14 * std::max(1.0, std::abs(x)));
    }
  }

  TEST_CASE("normal quantile against erfc bisection on the grid") {
    for (double q : default_quantile_grid()) {
      CAPTURE(q);
      CHECK(std::abs(normal_quantile(q) - quantile_by_bisection(q)) <= 1e-14);
      CHECK(std::abs(normal_cdf(normal_quantile(q)) - q) <= 1e-15);
    }
    CHECK(default_quantile_grid().size() == 99);
  }
}
