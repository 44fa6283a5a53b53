#pragma once

#include "aplf/instance.hpp"
#include "aplf/model_types.hpp"
#include "aplf/recursive_learner.hpp"

#include <vector>

namespace aplf {

/// Factorization of N(x; a, b) N(y; alpha x, beta) into a posterior over x
/// and a marginal over y.
struct GaussianSplit {
  double posterior_mean = 0.0;
  double posterior_std = 0.0;
  double marginal_mean = 0.0;
  double marginal_std = 0.0;
};

GaussianSplit gaussian_product_split(double a, double b, double alpha, double beta, double y);

/// One step of the forward recursion: propagate `prev` through the load
/// transition channel, then condition on the observation channel. A null
/// `r_params` skips the conditioning (untrained observation channel).
///
/// Throws DegenerateVariances when both channel variances and the
/// propagated variance are zero.
ForecastPoint forecast_step(const ForecastPoint& prev, const GaussianChannelParams& s_params,
                            const GaussianChannelParams* r_params, const Vector& u_r);

struct ForecastPath {
  Timestamp anchor_time;
  std::vector<ForecastPoint> points;
};

/// Calendar type whose parameters stood in for an untrained one.
struct ColdStartFallback {
  int step = 0;
  CalendarType requested;
  CalendarType used;
  bool observation_channel = false;
};

struct PredictOptions {
  // When false, any untrained calendar type raises ColdStart.
  bool cold_start_fallback = true;
};

struct Prediction {
  ForecastPath path;
  std::vector<ColdStartFallback> fallbacks;
  // Observation channels with no trained calendar type anywhere; those steps
  // were pure propagation.
  int unconditioned_steps = 0;
};

/// L-step Gaussian forecast from the latest model. Calendar types come from
/// the instance steps; observations are encoded against the model's
/// temperature means. Deterministic and side-effect free.
Prediction predict(const OnlineModel& model, const InstanceVector& instance, const HyperParams& hp,
                   const PredictOptions& options = {});

/// Standard normal quantile function (Wichura's AS241, ~1e-16 relative).
double normal_quantile(double p);

double normal_cdf(double x);

/// mean + std * normal_quantile(q). Throws QOutOfRange unless 0 < q < 1.
double quantile(const ForecastPoint& point, double q);

/// 0.01, 0.02, ..., 0.99.
std::vector<double> default_quantile_grid();

}  // namespace aplf
