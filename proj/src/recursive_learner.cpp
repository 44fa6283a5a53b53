#include "aplf/recursive_learner.hpp"

#include <cmath>
#include <numbers>

namespace aplf {

std::pair<ChannelState, GaussianChannelParams> channel_update(const ChannelState& state,
                                                              const GaussianChannelParams& params,
                                                              const Vector& u, double s,
                                                              double lambda,
                                                              LearnerDiagnostics* diag) {
  const Vector pu = state.p * u;
  const double denom = lambda + u.dot(pu);
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw DegenerateUpdate("lambda + u'Pu = " + std::to_string(denom) + " is not positive");
  }
  const double innovation = s - u.dot(params.eta);

  ChannelState next_state;
  next_state.gamma = 1.0 + lambda * state.gamma;

  const double prev_var = params.sigma * params.sigma;
  double radicand = prev_var - (prev_var - lambda * innovation * innovation / denom) / next_state.gamma;
  if (radicand < 0.0) {
    radicand = 0.0;
    if (diag) ++diag->radicand_clamps;
  }

  GaussianChannelParams next_params;
  next_params.sigma = std::sqrt(radicand);
  next_params.eta = params.eta + pu * (innovation / denom);

  next_state.p = (state.p - pu * pu.transpose() / denom) / lambda;
  next_state.p = 0.5 * (next_state.p + next_state.p.transpose()).eval();

  if (diag) ++diag->updates;
  return {std::move(next_state), std::move(next_params)};
}

std::pair<ChannelState, GaussianChannelParams> batch_initialize(std::span<const Sample> samples,
                                                                double lambda) {
  if (samples.empty()) throw SingularGram("no samples to initialize from");
  const Eigen::Index k = samples.front().u.size();
  Matrix gram = Matrix::Zero(k, k);
  Vector moment = Vector::Zero(k);
  double gamma = 0.0;
  // Horner-style accumulation: each older sample picks up one more factor lambda.
  for (const Sample& x : samples) {
    gram = lambda * gram + x.u * x.u.transpose();
    moment = lambda * moment + x.s * x.u;
    gamma = lambda * gamma + 1.0;
  }

  Eigen::JacobiSVD<Matrix> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  if (!(smallest > 0.0) || sv[0] / smallest > kMaxGramCondition) {
    throw SingularGram("weighted Gram matrix is singular or ill-conditioned");
  }

  ChannelState state;
  state.p = gram.inverse();
  state.p = 0.5 * (state.p + state.p.transpose()).eval();
  state.gamma = gamma;

  GaussianChannelParams params;
  params.eta = svd.solve(moment);
  double rss = 0.0;
  for (const Sample& x : samples) {
    const double r = x.s - x.u.dot(params.eta);
    rss = lambda * rss + r * r;
  }
  params.sigma = std::sqrt(rss / gamma);
  return {std::move(state), std::move(params)};
}

ChannelState trace_reset(ChannelState state, const HyperParams& hp) {
  if (state.p.trace() > hp.trace_reset_threshold) {
    state.p = Matrix::Identity(state.p.rows(), state.p.cols());
  }
  return state;
}

double weighted_log_likelihood(std::span<const Sample> samples, const Vector& eta, double sigma,
                               double lambda) {
  if (!(sigma > 0.0)) throw NonPositiveSigma("log-likelihood needs sigma > 0");
  const double log_norm = std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
  double total = 0.0;
  for (const Sample& x : samples) {
    const double r = x.s - x.u.dot(eta);
    total = lambda * total - r * r / (2.0 * sigma * sigma) - log_norm;
  }
  return total;
}

OnlineModel::OnlineModel(const HyperParams& hp, int observation_features, InitMode mode)
    : params(hp.calendar_types, observation_features),
      state(hp.calendar_types, observation_features),
      tracker(hp.calendar_types),
      init_mode(mode) {
  if (mode == InitMode::batch) {
    s_warmup.assign(static_cast<std::size_t>(hp.calendar_types), ChannelWarmup{true, {}});
    r_warmup.assign(static_cast<std::size_t>(hp.calendar_types), ChannelWarmup{true, {}});
  }
}

namespace {

void update_channel(ChannelState& state, GaussianChannelParams& params, ChannelWarmup* warmup,
                    const Vector& u, double s, double lambda, const HyperParams& hp,
                    LearnerDiagnostics* diag) {
  auto recurse = [&](const Vector& uu, double ss) {
    auto [next_state, next_params] = channel_update(state, params, uu, ss, lambda, diag);
    const double before = next_state.p.trace();
    state = trace_reset(std::move(next_state), hp);
    if (diag && state.p.trace() != before) ++diag->trace_resets;
    params = std::move(next_params);
  };

  if (warmup == nullptr || !warmup->pending) {
    recurse(u, s);
    return;
  }

  warmup->samples.push_back({u, s});
  try {
    auto [init_state, init_params] = batch_initialize(warmup->samples, lambda);
    state = std::move(init_state);
    params = std::move(init_params);
    warmup->pending = false;
    warmup->samples.clear();
    return;
  } catch (const SingularGram&) {
  }
  if (warmup->samples.size() >= kMaxWarmupSamples) {
    const std::vector<Sample> buffered = std::move(warmup->samples);
    warmup->samples.clear();
    warmup->pending = false;
    for (const Sample& x : buffered) recurse(x.u, x.s);
  }
}

ChannelWarmup* warmup_slot(std::vector<ChannelWarmup>& buffers, CalendarType c) {
  return buffers.empty() ? nullptr : &buffers.at(c.slot());
}

}  // namespace

void learn_step(OnlineModel& model, const InstanceVector& instance,
                std::span<const std::optional<double>> targets, const HyperParams& hp,
                LearnerDiagnostics* diag) {
  learn_sequence(model, instance.anchor_load, instance.steps, targets, hp, diag);
}

void learn_sequence(OnlineModel& model, std::optional<double> previous_load,
                    std::span<const StepObservation> steps,
                    std::span<const std::optional<double>> targets, const HyperParams& hp,
                    LearnerDiagnostics* diag) {
  if (targets.size() != steps.size()) {
    throw InvalidArgument("learning needs one target per step");
  }
  std::optional<double> previous = previous_load;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const StepObservation& step = steps[i];
    const CalendarType c = step.type;
    const std::optional<double>& target = targets[i];
    const Vector u_r = step.features ? *step.features : observation_features(step.temperature, c, model.tracker, hp);

    if (target) {
      auto& entry = model.params[c];
      auto& st = model.state[c];
      if (previous) {
        Vector u_s(kLoadFeatures);
        u_s << 1.0, *previous;
        update_channel(st.s_state, entry.s_channel, warmup_slot(model.s_warmup, c), u_s, *target,
                       hp.lambda_s, hp, diag);
      }
      if (step.observed()) {
        update_channel(st.r_state, entry.r_channel, warmup_slot(model.r_warmup, c), u_r, *target,
                       hp.lambda_r, hp, diag);
      } else if (diag) {
        ++diag->r_channel_skips;
      }
    }
    if (step.temperature) model.tracker.update(c, *step.temperature);
    previous = target;
  }
}

}  // namespace aplf
