#pragma once

// Reference implementations kept independent of the fast paths in
// recursive_learner and forecaster. Used by the test suites and by
// `aplf self-check`.

#include "aplf/model_types.hpp"
#include "aplf/recursive_learner.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace aplf::oracle {

struct BatchFit {
  Vector eta;
  double sigma = 0.0;
};

/// Maximizer of the exponentially weighted Gaussian log-likelihood, from
/// the weighted normal equations solved by a pivoted QR factorization.
/// Throws SingularGram when the weighted Gram matrix is rank deficient.
BatchFit batch_ml(std::span<const Sample> samples, double lambda);

/// Gradient of the weighted log-likelihood with respect to (eta, sigma)
/// by complex-step differentiation, free of subtractive cancellation.
Vector likelihood_gradient(std::span<const Sample> samples, const Vector& eta, double sigma, double lambda);

/// Parameters in force at one forecast step.
struct FilterStep {
  GaussianChannelParams s_params;
  GaussianChannelParams r_params;
  Vector u_r;
};

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

/// p(s_{t+i} | s_t, r_{t+1..t+i}) by propagating through the transition
/// channel and conditioning on the observation channel in information
/// (precision) form. Throws DegenerateVariances on a zero variance.
std::vector<Moments> exact_filter(double anchor_load, std::span<const FilterStep> steps);

/// Same posterior moments by trapezoidal quadrature of the filtering
/// densities on a grid of `nodes` points per step.
std::vector<Moments> quadrature_filter(double anchor_load, std::span<const FilterStep> steps,
                                       int nodes = 2001);

struct SelfCheckResult {
  std::string name;
  bool passed = false;
  double worst_error = 0.0;
  double tolerance = 0.0;
};

/// Random regression samples: u = [1, N(0,1)...] of length k and
/// s = u'beta + N(0, noise) with beta ~ N(0, 3).
std::vector<Sample> random_samples(std::mt19937_64& rng, int k, int n, double noise = 1.0);

/// Random parameters for `length` forecast steps, observation features
/// [1, a1, a2] with a1*a2 = 0.
std::vector<FilterStep> random_filter_steps(std::mt19937_64& rng, int length);

/// Randomized agreement checks between the fast paths and the oracles.
std::vector<SelfCheckResult> run_self_check(std::uint64_t seed = 20200101);

}  // namespace aplf::oracle
