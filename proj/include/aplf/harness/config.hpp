#pragma once

#include "aplf/civil_time.hpp"
#include "aplf/features.hpp"
#include "aplf/harness/series.hpp"
#include "aplf/model_types.hpp"
#include "aplf/recursive_learner.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aplf::harness {

/// A prediction issued at a local date and time with its own horizon.
struct ScheduledPrediction {
  std::chrono::sys_days date;
  int minute_of_day = 0;
  int horizon = 0;
};

struct RunConfig {
  HyperParams hp;
  int prediction_minute_of_day = 11 * 60;
  std::optional<Timestamp> train_end;  // predictions start at or after this time
  std::optional<Timestamp> test_end;   // and are issued no later than this one
  HolidaySet holidays;
  std::optional<TemperatureUnit> temperature_unit;
  std::string load_unit;
  int step_minutes = 60;
  InitMode init_mode = InitMode::zero;
  bool write_quantiles = false;
  std::filesystem::path output_dir = ".";
  // Empty: one prediction per day at prediction_minute_of_day.
  std::vector<ScheduledPrediction> schedule;

  IngestOptions ingest_options() const { return {step_minutes, temperature_unit, load_unit}; }
};

/// Parses flat "key = value" text ('#' starts a comment). Relative file
/// references resolve against `base_dir`. Throws InputError naming the
/// offending line on unknown keys or bad values.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// "YYYY-MM-DD HH:MM [horizon]" per line; horizon defaults to `default_horizon`.
std::vector<ScheduledPrediction> parse_schedule(std::string_view text, int default_horizon);

}  // namespace aplf::harness
