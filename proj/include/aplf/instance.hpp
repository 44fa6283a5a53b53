#pragma once

#include "aplf/civil_time.hpp"
#include "aplf/model_types.hpp"

#include <optional>
#include <vector>

namespace aplf {

/// One future step of an instance: its time, resolved calendar type and
/// the recorded temperature (degrees Fahrenheit), if any. When `features`
/// is set it is used as the observation vector instead of the temperature
/// encoding.
struct StepObservation {
  Timestamp time;
  CalendarType type;
  std::optional<double> temperature;
  std::optional<Vector> features;

  bool observed() const { return features.has_value() || temperature.has_value(); }
};

/// The anchoring load s_t plus the observations for t+1..t+L.
struct InstanceVector {
  Timestamp anchor_time;
  double anchor_load = 0.0;
  std::vector<StepObservation> steps;

  int horizon() const { return static_cast<int>(steps.size()); }
};

}  // namespace aplf
