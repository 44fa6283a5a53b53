#include "aplf/features.hpp"

#include <cmath>

namespace aplf {

CalendarType calendar_type(const Timestamp& ts, const HolidaySet& holidays) {
  const auto wd = ts.weekday();
  const bool off_day = wd == std::chrono::Saturday || wd == std::chrono::Sunday ||
                       holidays.contains(ts.local_date());
  return CalendarType{ts.hour() + (off_day ? 25 : 1)};
}

Vector encode_observations(const ObservationVector& r, const HyperParams& hp) {
  const double shift = r.w - r.w_bar;
  const bool extreme = r.w > hp.w2 || r.w < hp.w3;
  Vector u(kObservationFeatures);
  u << 1.0, (extreme && shift > hp.w1) ? 1.0 : 0.0, (extreme && shift < -hp.w1) ? 1.0 : 0.0;
  return u;
}

Vector neutral_observation() {
  Vector u = Vector::Zero(kObservationFeatures);
  u[0] = 1.0;
  return u;
}

TemperatureTracker::TemperatureTracker(int calendar_types)
    : sums_(static_cast<std::size_t>(calendar_types), 0.0),
      counts_(static_cast<std::size_t>(calendar_types), 0) {
  if (calendar_types < 1) throw InvalidArgument("tracker needs at least one calendar type");
}

TemperatureTracker TemperatureTracker::from_raw(std::vector<double> sums, std::vector<long long> counts) {
  if (sums.size() != counts.size()) throw InvalidArgument("tracker sums/counts size mismatch");
  TemperatureTracker t;
  t.sums_ = std::move(sums);
  t.counts_ = std::move(counts);
  return t;
}

void TemperatureTracker::update(CalendarType c, double w) {
  if (!std::isfinite(w)) throw InvalidArgument("temperature must be finite");
  sums_.at(c.slot()) += w;
  ++counts_.at(c.slot());
}

std::optional<double> TemperatureTracker::mean(CalendarType c) const {
  const long long n = counts_.at(c.slot());
  if (n == 0) return std::nullopt;
  return sums_[c.slot()] / static_cast<double>(n);
}

TemperatureTracker update_temperature_mean(TemperatureTracker tracker, CalendarType c, double w) {
  tracker.update(c, w);
  return tracker;
}

Vector observation_features(const std::optional<double>& w, CalendarType c,
                            const TemperatureTracker& tracker, const HyperParams& hp) {
  const auto w_bar = tracker.mean(c);
  if (!w || !w_bar) return neutral_observation();
  return encode_observations({*w, *w_bar}, hp);
}

double celsius_to_fahrenheit(double c) { return c * 9.0 / 5.0 + 32.0; }

}  // namespace aplf
