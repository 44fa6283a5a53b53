#pragma once

#include "aplf/features.hpp"
#include "aplf/instance.hpp"
#include "aplf/model_types.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace aplf {

/// One (feature vector, load) pair of a channel.
struct Sample {
  Vector u;
  double s = 0.0;
};

struct LearnerDiagnostics {
  long long updates = 0;
  // Times a slightly negative variance radicand was clamped to zero.
  long long radicand_clamps = 0;
  long long trace_resets = 0;
  long long r_channel_skips = 0;
};

/// One exponentially weighted maximum-likelihood step for a single channel.
///
/// With e = s - u'eta, d = lambda + u'Pu and gamma' = 1 + lambda*gamma:
///   sigma'^2 = sigma^2 - (sigma^2 - lambda*e^2/d) / gamma'
///   eta'     = eta + P u e / d
///   P'       = (P - P u u' P / d) / lambda
/// The gain uses the state before the update. A negative radicand is
/// clamped to zero and counted in `diag`.
///
/// Throws DegenerateUpdate when d <= 0, which only a corrupted P can cause.
std::pair<ChannelState, GaussianChannelParams> channel_update(
    const ChannelState& state, const GaussianChannelParams& params, const Vector& u, double s,
    double lambda, LearnerDiagnostics* diag = nullptr);

/// Exact initialization from the first samples of a channel: P is the
/// inverse weighted Gram matrix, eta and sigma its weighted ML solution.
/// Recursing with channel_update from here tracks the batch maximizer
/// exactly. Throws SingularGram when the Gram matrix has condition number
/// above kMaxGramCondition.
std::pair<ChannelState, GaussianChannelParams> batch_initialize(std::span<const Sample> samples,
                                                                double lambda);

inline constexpr double kMaxGramCondition = 1e12;

/// Resets P to the identity when its trace exceeds the configured threshold.
ChannelState trace_reset(ChannelState state, const HyperParams& hp);

/// sum_j lambda^(n-j) log N(s_j; u_j'eta, sigma) for j = 1..n.
double weighted_log_likelihood(std::span<const Sample> samples, const Vector& eta, double sigma,
                               double lambda);

enum class InitMode { zero, batch };

/// Samples buffered for a channel that is waiting for a non-singular Gram
/// matrix before exact initialization (batch init mode only).
struct ChannelWarmup {
  bool pending = false;
  std::vector<Sample> samples;
};

/// Everything the online learner mutates: parameters, state variables,
/// temperature means and (in batch mode) per-channel warm-up buffers.
struct OnlineModel {
  ModelParams params;
  LearnerState state;
  TemperatureTracker tracker;
  InitMode init_mode = InitMode::zero;
  std::vector<ChannelWarmup> s_warmup;
  std::vector<ChannelWarmup> r_warmup;

  OnlineModel() = default;
  OnlineModel(const HyperParams& hp, int observation_features, InitMode mode = InitMode::zero);
};

/// Warm-up buffers longer than this give up on exact initialization and
/// replay through the zero-initialized recursion instead.
inline constexpr std::size_t kMaxWarmupSamples = 64;

/// Learning step over one instance and its revealed loads. For each step i,
/// the s-channel of c(t+i) learns from u_s = [1, s_{t+i-1}] (actual loads)
/// and the r-channel from the encoded observation; trace_reset runs after
/// every update. Steps with a missing load are skipped, steps with neither
/// a temperature nor precomputed features only train the s-channel.
/// Temperature means are updated after each step is encoded.
void learn_step(OnlineModel& model, const InstanceVector& instance,
                std::span<const std::optional<double>> targets, const HyperParams& hp,
                LearnerDiagnostics* diag = nullptr);

/// learn_step with a possibly unknown load before the first step.
void learn_sequence(OnlineModel& model, std::optional<double> previous_load,
                    std::span<const StepObservation> steps,
                    std::span<const std::optional<double>> targets, const HyperParams& hp,
                    LearnerDiagnostics* diag = nullptr);

}  // namespace aplf
