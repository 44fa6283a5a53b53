#include "aplf/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace aplf {

GaussianSplit gaussian_product_split(double a, double b, double alpha, double beta, double y) {
  const double b2 = b * b;
  const double beta2 = beta * beta;
  const double denom = beta2 + alpha * alpha * b2;
  GaussianSplit out;
  out.posterior_mean = (a * beta2 + alpha * y * b2) / denom;
  out.posterior_std = std::sqrt(b2 * beta2 / denom);
  out.marginal_mean = a * alpha;
  out.marginal_std = std::sqrt(denom);
  return out;
}

ForecastPoint forecast_step(const ForecastPoint& prev, const GaussianChannelParams& s_params,
                            const GaussianChannelParams* r_params, const Vector& u_r) {
  const double slope = s_params.eta[1];
  const double propagated_mean = s_params.eta[0] + slope * prev.mean;
  const double propagated_var =
      s_params.sigma * s_params.sigma + slope * slope * prev.std * prev.std;

  ForecastPoint next;
  next.step = prev.step + 1;
  if (r_params == nullptr) {
    next.mean = propagated_mean;
    next.std = std::sqrt(propagated_var);
    return next;
  }

  const double obs_mean = r_params->mean(u_r);
  const double obs_var = r_params->sigma * r_params->sigma;
  const double denom = obs_var + propagated_var;
  if (!(denom > 0.0)) {
    throw DegenerateVariances("both channels and the propagated forecast have zero variance");
  }
  next.mean = (propagated_mean * obs_var + obs_mean * propagated_var) / denom;
  next.std = std::sqrt(obs_var * propagated_var / denom);
  return next;
}

namespace {

// Candidate calendar types to borrow parameters from, nearest first. With
// the 48-type hourly layout: the same hour of the other day class, then
// hours at increasing distance (same day class first). Otherwise plain
// index distance.
std::vector<CalendarType> fallback_order(CalendarType c, int calendar_types) {
  std::vector<CalendarType> order;
  if (calendar_types == 48) {
    const int hour = (c.index() - 1) % 24;
    const int base = c.index() > 24 ? 25 : 1;
    const int other = c.index() > 24 ? 1 : 25;
    order.emplace_back(other + hour);
    for (int d = 1; d <= 12; ++d) {
      for (int b : {base, other}) {
        order.emplace_back(b + (hour + 24 - d) % 24);
        if (d != 12) order.emplace_back(b + (hour + d) % 24);
      }
    }
    return order;
  }
  for (int d = 1; d < calendar_types; ++d) {
    if (c.index() - d >= 1) order.emplace_back(c.index() - d);
    if (c.index() + d <= calendar_types) order.emplace_back(c.index() + d);
  }
  return order;
}

template <typename Trained>
std::optional<CalendarType> nearest_trained(CalendarType c, int calendar_types, Trained trained) {
  for (CalendarType candidate : fallback_order(c, calendar_types)) {
    if (trained(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace

Prediction predict(const OnlineModel& model, const InstanceVector& instance, const HyperParams& hp,
                   const PredictOptions& options) {
  Prediction out;
  out.path.anchor_time = instance.anchor_time;
  out.path.points.reserve(instance.steps.size());

  const int types = model.params.calendar_types();
  auto s_trained = [&](CalendarType c) { return model.state[c].s_state.trained(); };
  auto r_trained = [&](CalendarType c) { return model.state[c].r_state.trained(); };

  ForecastPoint current{instance.anchor_load, 0.0, 0, instance.anchor_time};
  for (std::size_t i = 0; i < instance.steps.size(); ++i) {
    const StepObservation& step = instance.steps[i];
    const int step_number = static_cast<int>(i) + 1;

    CalendarType s_type = step.type;
    if (!s_trained(s_type)) {
      const auto alt = options.cold_start_fallback ? nearest_trained(s_type, types, s_trained)
                                                   : std::nullopt;
      if (!alt) {
        throw ColdStart("calendar type " + std::to_string(s_type.index()) +
                        " has no trained load-transition parameters");
      }
      out.fallbacks.push_back({step_number, s_type, *alt, false});
      s_type = *alt;
    }

    const GaussianChannelParams* r_params = nullptr;
    CalendarType r_type = step.type;
    if (r_trained(r_type)) {
      r_params = &model.params[r_type].r_channel;
    } else {
      if (!options.cold_start_fallback) {
        throw ColdStart("calendar type " + std::to_string(r_type.index()) +
                        " has no trained observation parameters");
      }
      if (const auto alt = nearest_trained(r_type, types, r_trained)) {
        out.fallbacks.push_back({step_number, r_type, *alt, true});
        r_params = &model.params[*alt].r_channel;
      } else {
        ++out.unconditioned_steps;
      }
    }

    const Vector u_r =
        step.features ? *step.features : observation_features(step.temperature, step.type, model.tracker, hp);
    current = forecast_step(current, model.params[s_type].s_channel, r_params, u_r);
    current.time = step.time;
    out.path.points.push_back(current);
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw QOutOfRange("normal quantile needs 0 < p < 1");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }

  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value = 0.0;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

double quantile(const ForecastPoint& point, double q) {
  if (!(q > 0.0 && q < 1.0)) throw QOutOfRange("quantile level must lie in (0, 1)");
  if (point.std == 0.0) return point.mean;
  return point.mean + point.std * normal_quantile(q);
}

std::vector<double> default_quantile_grid() {
  std::vector<double> grid;
  grid.reserve(99);
  for (int k = 1; k <= 99; ++k) grid.push_back(k / 100.0);
  return grid;
}

}  // namespace aplf
