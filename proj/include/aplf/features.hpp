#pragma once

#include "aplf/civil_time.hpp"
#include "aplf/model_types.hpp"

#include <chrono>
#include <optional>
#include <set>
#include <vector>

namespace aplf {

using HolidaySet = std::set<std::chrono::sys_days>;

/// Calendar classes produced by calendar_type(): 24 weekday hours followed
/// by 24 weekend/holiday hours.
inline constexpr int kHourlyCalendarTypes = 48;

/// Hour h of a weekday maps to h+1; of a Saturday, Sunday or holiday to h+25.
CalendarType calendar_type(const Timestamp& ts, const HolidaySet& holidays);

/// Length of the vector returned by encode_observations.
inline constexpr int kObservationFeatures = 3;

/// Temperature and the mean of past temperatures for the same calendar type.
struct ObservationVector {
  double w = 0.0;
  double w_bar = 0.0;
};

/// Temperature-shift encoding [1, a1, a2] (degrees Fahrenheit). a1 flags a
/// warm shift larger than W1, a2 a cold one; either only counts when the
/// temperature itself is extreme (above W2 or below W3).
Vector encode_observations(const ObservationVector& r, const HyperParams& hp);

/// Encoding used when the temperature or its running mean is unavailable.
Vector neutral_observation();

/// All-history running mean of temperature per calendar type.
class TemperatureTracker {
 public:
  TemperatureTracker() = default;
  explicit TemperatureTracker(int calendar_types);

  int calendar_types() const { return static_cast<int>(sums_.size()); }

  void update(CalendarType c, double w);
  std::optional<double> mean(CalendarType c) const;
  long long count(CalendarType c) const { return counts_.at(c.slot()); }

  // Raw accumulators, exposed for snapshots.
  const std::vector<double>& sums() const { return sums_; }
  const std::vector<long long>& counts() const { return counts_; }
  static TemperatureTracker from_raw(std::vector<double> sums, std::vector<long long> counts);

  friend bool operator==(const TemperatureTracker&, const TemperatureTracker&) = default;

 private:
  std::vector<double> sums_;
  std::vector<long long> counts_;
};

/// Functional form of TemperatureTracker::update.
TemperatureTracker update_temperature_mean(TemperatureTracker tracker, CalendarType c, double w);

/// Encodes a possibly missing temperature against the tracker's current mean.
Vector observation_features(const std::optional<double>& w, CalendarType c,
                            const TemperatureTracker& tracker, const HyperParams& hp);

double celsius_to_fahrenheit(double c);

}  // namespace aplf
