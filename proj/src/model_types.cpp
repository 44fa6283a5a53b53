#include "aplf/model_types.hpp"

#include <cmath>

namespace aplf {

ModelParams::ModelParams(int calendar_types, int observation_features)
    : observation_features_(observation_features) {
  if (calendar_types < 1 || observation_features < 1) {
    throw InvalidArgument("model needs at least one calendar type and one observation feature");
  }
  entries_.assign(static_cast<std::size_t>(calendar_types),
                  CalendarParams{GaussianChannelParams::zero(kLoadFeatures),
                                 GaussianChannelParams::zero(observation_features)});
}

LearnerState::LearnerState(int calendar_types, int observation_features)
    : observation_features_(observation_features) {
  if (calendar_types < 1 || observation_features < 1) {
    throw InvalidArgument("state needs at least one calendar type and one observation feature");
  }
  entries_.assign(static_cast<std::size_t>(calendar_types),
                  CalendarState{ChannelState::identity(kLoadFeatures),
                                ChannelState::identity(observation_features)});
}

void HyperParams::validate() const {
  auto in_unit_interval = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit_interval(lambda_s) || !in_unit_interval(lambda_r)) {
    throw InvalidArgument("forgetting factors must lie in (0, 1)");
  }
  if (!std::isfinite(w1) || !std::isfinite(w2) || !std::isfinite(w3)) {
    throw InvalidArgument("temperature thresholds must be finite");
  }
  if (calendar_types < 1) throw InvalidArgument("calendar_types must be >= 1");
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (!(trace_reset_threshold > 0.0)) throw InvalidArgument("trace_reset_threshold must be > 0");
}

namespace {

template <typename Derived>
bool same_values(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Derived>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

bool operator==(const GaussianChannelParams& a, const GaussianChannelParams& b) {
  return a.sigma == b.sigma && same_values(a.eta, b.eta);
}

bool operator==(const ChannelState& a, const ChannelState& b) {
  return a.gamma == b.gamma && same_values(a.p, b.p);
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (a.observation_features() != b.observation_features()) return false;
  if (a.entries().size() != b.entries().size()) return false;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    if (!(a.entries()[i].s_channel == b.entries()[i].s_channel)) return false;
    if (!(a.entries()[i].r_channel == b.entries()[i].r_channel)) return false;
  }
  return true;
}

bool operator==(const LearnerState& a, const LearnerState& b) {
  if (a.observation_features() != b.observation_features()) return false;
  if (a.entries().size() != b.entries().size()) return false;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    if (!(a.entries()[i].s_state == b.entries()[i].s_state)) return false;
    if (!(a.entries()[i].r_state == b.entries()[i].r_state)) return false;
  }
  return true;
}

}  // namespace aplf
