#pragma once

#include "aplf/civil_time.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace aplf {

// Errors are split by the CLI exit code they map to: bad input (2) or a
// numerical degeneracy (3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

#define APLF_DEFINE_ERROR(Name, Base)  \
  class Name : public Base {           \
   public:                             \
    using Base::Base;                  \
  };

APLF_DEFINE_ERROR(DegenerateUpdate, NumericalError)
APLF_DEFINE_ERROR(SingularGram, NumericalError)
APLF_DEFINE_ERROR(NonPositiveSigma, NumericalError)
APLF_DEFINE_ERROR(DegenerateVariances, NumericalError)
APLF_DEFINE_ERROR(ColdStart, NumericalError)
APLF_DEFINE_ERROR(QOutOfRange, InputError)
APLF_DEFINE_ERROR(EmptyInput, InputError)
APLF_DEFINE_ERROR(InvalidArgument, InputError)

#undef APLF_DEFINE_ERROR

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// 1-based calendar class of a timestamp, valid in [1, C].
class CalendarType {
 public:
  constexpr CalendarType() = default;
  constexpr explicit CalendarType(int index) : index_(index) {}

  constexpr int index() const { return index_; }
  constexpr std::size_t slot() const { return static_cast<std::size_t>(index_ - 1); }

  friend constexpr bool operator==(CalendarType, CalendarType) = default;

 private:
  int index_ = 1;
};

/// Mean regression coefficients and conditional standard deviation of one
/// Gaussian channel: s ~ N(u' eta, sigma).
struct GaussianChannelParams {
  Vector eta;
  double sigma = 1.0;

  static GaussianChannelParams zero(int k) { return {Vector::Zero(k), 1.0}; }
  double mean(const Vector& u) const { return u.dot(eta); }
};

/// Inverse weighted Gram matrix and effective sample weight of one channel.
struct ChannelState {
  Matrix p;
  double gamma = 0.0;

  static ChannelState identity(int k) { return {Matrix::Identity(k, k), 0.0}; }
  bool trained() const { return gamma > 0.0; }
};

struct CalendarParams {
  GaussianChannelParams s_channel;
  GaussianChannelParams r_channel;
};

struct CalendarState {
  ChannelState s_state;
  ChannelState r_state;
};

inline constexpr int kLoadFeatures = 2;

/// Parameter set over all calendar types. The s-channel uses u_s = [1, s_prev].
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(int calendar_types, int observation_features);

  int calendar_types() const { return static_cast<int>(entries_.size()); }
  int observation_features() const { return observation_features_; }

  CalendarParams& operator[](CalendarType c) { return entries_.at(c.slot()); }
  const CalendarParams& operator[](CalendarType c) const { return entries_.at(c.slot()); }

  const std::vector<CalendarParams>& entries() const { return entries_; }
  std::vector<CalendarParams>& entries() { return entries_; }

 private:
  std::vector<CalendarParams> entries_;
  int observation_features_ = 0;
};

class LearnerState {
 public:
  LearnerState() = default;
  LearnerState(int calendar_types, int observation_features);

  int calendar_types() const { return static_cast<int>(entries_.size()); }
  int observation_features() const { return observation_features_; }

  CalendarState& operator[](CalendarType c) { return entries_.at(c.slot()); }
  const CalendarState& operator[](CalendarType c) const { return entries_.at(c.slot()); }

  const std::vector<CalendarState>& entries() const { return entries_; }
  std::vector<CalendarState>& entries() { return entries_; }

 private:
  std::vector<CalendarState> entries_;
  int observation_features_ = 0;
};

struct HyperParams {
  double lambda_s = 0.2;
  double lambda_r = 0.7;
  // Temperature thresholds in degrees Fahrenheit.
  double w1 = 20.0;
  double w2 = 80.0;
  double w3 = 20.0;
  int calendar_types = 48;
  int horizon = 24;
  double trace_reset_threshold = 10.0;

  /// Throws InvalidArgument when any field is out of range.
  void validate() const;
};

/// Gaussian predictive distribution N(mean, std) for one step.
struct ForecastPoint {
  double mean = 0.0;
  double std = 0.0;
  // Steps after the anchor; 0 is the known anchoring load.
  int step = 0;
  Timestamp time;
};

bool operator==(const GaussianChannelParams& a, const GaussianChannelParams& b);
bool operator==(const ChannelState& a, const ChannelState& b);
bool operator==(const ModelParams& a, const ModelParams& b);
bool operator==(const LearnerState& a, const LearnerState& b);

}  // namespace aplf
