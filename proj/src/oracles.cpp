#include "aplf/oracles.hpp"

#include "aplf/forecaster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <tuple>

namespace aplf::oracle {

BatchFit batch_ml(std::span<const Sample> samples, double lambda) {
  if (samples.empty()) throw SingularGram("no samples");
  const Eigen::Index k = samples.front().u.size();
  const std::size_t n = samples.size();
  Matrix gram = Matrix::Zero(k, k);
  Vector moment = Vector::Zero(k);
  double total_weight = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = std::pow(lambda, static_cast<double>(n - 1 - j));
    gram.noalias() += w * samples[j].u * samples[j].u.transpose();
    moment += w * samples[j].s * samples[j].u;
    total_weight += w;
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(gram);
  qr.setThreshold(1e-12);
  if (qr.rank() < k) throw SingularGram("weighted Gram matrix is rank deficient");

  BatchFit fit;
  fit.eta = qr.solve(moment);
  // At the maximizer, sum w s^2 - q'eta equals the weighted residual sum
  // of squares; the residual form avoids the cancellation.
  double rss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = std::pow(lambda, static_cast<double>(n - 1 - j));
    const double r = samples[j].s - samples[j].u.dot(fit.eta);
    rss += w * r * r;
  }
  fit.sigma = std::sqrt(rss / total_weight);
  return fit;
}

namespace {

template <typename T>
T weighted_log_likelihood_t(std::span<const Sample> samples, const std::vector<T>& eta, T sigma, double lambda) {
  const std::size_t n = samples.size();
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  T total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = std::pow(lambda, static_cast<double>(n - 1 - j));
    T mean = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) mean += samples[j].u[static_cast<Eigen::Index>(i)] * eta[i];
    const T r = samples[j].s - mean;
    total += w * (-0.5 * log_2pi - std::log(sigma) - r * r / (2.0 * sigma * sigma));
  }
  return total;
}

}  // namespace

Vector likelihood_gradient(std::span<const Sample> samples, const Vector& eta, double sigma, double lambda) {
  using C = std::complex<double>;
  constexpr double h = 1e-30;
  const std::size_t k = static_cast<std::size_t>(eta.size());
  Vector grad(eta.size() + 1);
  for (std::size_t i = 0; i <= k; ++i) {
    std::vector<C> e(k);
    for (std::size_t m = 0; m < k; ++m) e[m] = eta[static_cast<Eigen::Index>(m)];
    C sg = sigma;
    if (i < k) e[i] += C(0.0, h);
    else sg += C(0.0, h);
    grad[static_cast<Eigen::Index>(i)] = weighted_log_likelihood_t(samples, e, sg, lambda).imag() / h;
  }
  return grad;
}

std::vector<Moments> exact_filter(double anchor_load, std::span<const FilterStep> steps) {
  std::vector<Moments> out;
  out.reserve(steps.size());
  double mean = anchor_load;
  double var = 0.0;
  for (const FilterStep& step : steps) {
    const double intercept = step.s_params.eta[0];
    const double slope = step.s_params.eta[1];
    // Marginalize the previous load through s = intercept + slope*x + noise.
    const double prior_mean = intercept + slope * mean;
    const double prior_var = step.s_params.sigma * step.s_params.sigma + slope * slope * var;
    const double obs_var = step.r_params.sigma * step.r_params.sigma;
    if (!(prior_var > 0.0) || !(obs_var > 0.0)) {
      throw DegenerateVariances("oracle needs positive variances");
    }
    const double obs_mean = step.u_r.dot(step.r_params.eta);
    const double precision = 1.0 / prior_var + 1.0 / obs_var;
    mean = (prior_mean / prior_var + obs_mean / obs_var) / precision;
    var = 1.0 / precision;
    out.push_back({mean, std::sqrt(var)});
  }
  return out;
}

namespace {

double log_density(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return -0.5 * z * z - std::log(sd * std::sqrt(2.0 * std::numbers::pi));
}

double trapezoid(const std::vector<double>& f, double h) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc += (i == 0 || i + 1 == f.size()) ? 0.5 * f[i] : f[i];
  }
  return acc * h;
}

}  // namespace

std::vector<Moments> quadrature_filter(double anchor_load, std::span<const FilterStep> steps,
                                       int nodes) {
  if (nodes < 3) throw InvalidArgument("quadrature needs at least 3 nodes");
  std::vector<Moments> out;
  out.reserve(steps.size());

  // Previous density on its grid; empty grid means a point mass at the anchor.
  std::vector<double> prev_x;
  std::vector<double> prev_f;
  double prev_h = 0.0;
  double mean = anchor_load;
  double sd = 0.0;
  constexpr double kPad = 10.0;

  for (const FilterStep& step : steps) {
    const double intercept = step.s_params.eta[0];
    const double slope = step.s_params.eta[1];
    const double sigma_s = step.s_params.sigma;
    const double sigma_r = step.r_params.sigma;
    const double obs_mean = step.u_r.dot(step.r_params.eta);
    if (!(sigma_s > 0.0) || !(sigma_r > 0.0)) throw DegenerateVariances("oracle needs positive variances");

    const double pred_center = intercept + slope * mean;
    const double pred_spread = std::sqrt(sigma_s * sigma_s + slope * slope * sd * sd);
    const double pad = kPad * std::min(pred_spread, sigma_r);
    const double lo = std::min(pred_center, obs_mean) - pad;
    const double hi = std::max(pred_center, obs_mean) + pad;
    const double h = (hi - lo) / (nodes - 1);

    std::vector<double> x(static_cast<std::size_t>(nodes));
    std::vector<double> log_f(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = lo + h * static_cast<double>(i);
      double transition = 0.0;
      if (prev_x.empty()) {
        transition = std::exp(log_density(x[i], intercept + slope * anchor_load, sigma_s));
      } else {
        std::vector<double> integrand(prev_x.size());
        for (std::size_t k = 0; k < prev_x.size(); ++k) {
          integrand[k] = prev_f[k] * std::exp(log_density(x[i], intercept + slope * prev_x[k], sigma_s));
        }
        transition = trapezoid(integrand, prev_h);
      }
      log_f[i] = std::log(std::max(transition, 1e-300)) + log_density(x[i], obs_mean, sigma_r);
    }

    const double peak = *std::max_element(log_f.begin(), log_f.end());
    std::vector<double> f(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) f[i] = std::exp(log_f[i] - peak);
    const double mass = trapezoid(f, h);
    for (double& v : f) v /= mass;

    std::vector<double> moment(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) moment[i] = x[i] * f[i];
    mean = trapezoid(moment, h);
    for (std::size_t i = 0; i < x.size(); ++i) moment[i] = (x[i] - mean) * (x[i] - mean) * f[i];
    sd = std::sqrt(trapezoid(moment, h));
    out.push_back({mean, sd});

    prev_x = std::move(x);
    prev_f = std::move(f);
    prev_h = h;
  }
  return out;
}

std::vector<Sample> random_samples(std::mt19937_64& rng, int k, int n, double noise) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector beta(k);
  for (int i = 0; i < k; ++i) beta[i] = 3.0 * normal(rng);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Vector u(k);
    u[0] = 1.0;
    for (int i = 1; i < k; ++i) u[i] = normal(rng);
    out.push_back({u, u.dot(beta) + noise * normal(rng)});
  }
  return out;
}

std::vector<FilterStep> random_filter_steps(std::mt19937_64& rng, int length) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FilterStep> out;
  out.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    FilterStep step;
    step.s_params.eta = Vector(2);
    step.s_params.eta << 2.0 * normal(rng), -0.9 + 1.8 * unit(rng);
    step.s_params.sigma = 0.5 + 1.5 * unit(rng);
    step.r_params.eta = Vector(3);
    step.r_params.eta << 2.0 * normal(rng), normal(rng), normal(rng);
    step.r_params.sigma = 0.5 + 1.5 * unit(rng);
    step.u_r = Vector::Zero(3);
    step.u_r[0] = 1.0;
    const double pick = unit(rng);
    if (pick < 0.25) step.u_r[1] = 1.0;
    else if (pick < 0.5) step.u_r[2] = 1.0;
    out.push_back(std::move(step));
  }
  return out;
}

namespace {

double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

SelfCheckResult check_exact_recovery(std::mt19937_64& rng) {
  SelfCheckResult r{"recursion matches batch maximizer after exact initialization", true, 0.0, 1e-8};
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 2 + trial % 2;
    const double lambda = std::array{0.2, 0.5, 0.7, 0.9, 0.99}[trial % 5];
    const auto samples = random_samples(rng, k, 60);
    const int i0 = k + 1;
    auto [state, params] = batch_initialize(std::span(samples).first(i0), lambda);
    // Index i is the last sample folded in; the first i0 come from initialization.
    for (int i = i0 - 1; i < static_cast<int>(samples.size()); ++i) {
      if (i >= i0) {
        std::tie(state, params) = channel_update(state, params, samples[i].u, samples[i].s, lambda);
      }
      const BatchFit fit = batch_ml(std::span(samples).first(i + 1), lambda);
      r.worst_error = std::max({r.worst_error, (params.eta - fit.eta).norm() / fit.eta.norm(),
                                relative_error(params.sigma, fit.sigma)});
    }
  }
  r.passed = r.worst_error <= r.tolerance;
  return r;
}

SelfCheckResult check_filter(std::mt19937_64& rng) {
  SelfCheckResult r{"forward recursion matches exact Gaussian filtering", true, 0.0, 1e-9};
  for (int trial = 0; trial < 100; ++trial) {
    const int length = 1 + trial % 24;
    const auto steps = random_filter_steps(rng, length);
    const double anchor = 5.0 * std::normal_distribution<double>(0.0, 1.0)(rng);
    const auto reference = exact_filter(anchor, steps);
    ForecastPoint point{anchor, 0.0, 0, {}};
    for (int i = 0; i < length; ++i) {
      point = forecast_step(point, steps[i].s_params, &steps[i].r_params, steps[i].u_r);
      const double scale = std::max(1.0, std::abs(reference[i].mean));
      r.worst_error = std::max({r.worst_error, std::abs(point.mean - reference[i].mean) / scale,
                                std::abs(point.std - reference[i].std) / std::max(1.0, reference[i].std)});
    }
  }
  r.passed = r.worst_error <= r.tolerance;
  return r;
}

SelfCheckResult check_quadrature(std::mt19937_64& rng) {
  SelfCheckResult r{"exact filtering matches quadrature", true, 0.0, 1e-6};
  for (int trial = 0; trial < 3; ++trial) {
    const auto steps = random_filter_steps(rng, 6);
    const auto exact = exact_filter(1.0, steps);
    const auto numeric = quadrature_filter(1.0, steps, 801);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      r.worst_error = std::max({r.worst_error, std::abs(exact[i].mean - numeric[i].mean),
                                std::abs(exact[i].std - numeric[i].std)});
    }
  }
  r.passed = r.worst_error <= r.tolerance;
  return r;
}

SelfCheckResult check_gradient(std::mt19937_64& rng) {
  SelfCheckResult r{"batch maximizer is a stationary point", true, 0.0, 1e-9};
  for (int trial = 0; trial < 20; ++trial) {
    const auto samples = random_samples(rng, 3, 30);
    const BatchFit fit = batch_ml(samples, 0.9);
    const Vector grad = likelihood_gradient(samples, fit.eta, fit.sigma, 0.9);
    r.worst_error = std::max(r.worst_error, grad.lpNorm<Eigen::Infinity>());
  }
  r.passed = r.worst_error <= r.tolerance;
  return r;
}

}  // namespace

std::vector<SelfCheckResult> run_self_check(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {check_exact_recovery(rng), check_filter(rng), check_quadrature(rng), check_gradient(rng)};
}

}  // namespace aplf::oracle
