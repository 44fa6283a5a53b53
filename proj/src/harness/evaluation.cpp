#include "aplf/harness/evaluation.hpp"

#include "aplf/features.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

namespace aplf::harness {

namespace {

// Records laid out on the regular step grid; gaps are empty slots.
class SlotGrid {
 public:
  SlotGrid(const std::vector<SeriesRecord>& records, int step_minutes) : step_(step_minutes) {
    if (records.empty()) return;
    const std::int64_t origin = records.front().timestamp.utc_minutes();
    const std::int64_t last = records.back().timestamp.utc_minutes();
    const std::size_t n = static_cast<std::size_t>((last - origin) / step_) + 1;
    record_.assign(n, -1);
    time_.resize(n);
    int offset = records.front().timestamp.utc_offset_minutes;
    std::size_t next = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::int64_t utc = origin + static_cast<std::int64_t>(k) * step_;
      if (next < records.size() && records[next].timestamp.utc_minutes() == utc) {
        record_[k] = static_cast<long>(next);
        time_[k] = records[next].timestamp;
        offset = time_[k].utc_offset_minutes;
        ++next;
      } else {
        time_[k] = Timestamp{utc + offset, offset};
      }
      by_local_.emplace(time_[k].local_minutes, k);
    }
  }

  std::size_t size() const { return time_.size(); }
  const Timestamp& time(std::size_t k) const { return time_[k]; }
  const SeriesRecord* record(const std::vector<SeriesRecord>& records, std::size_t k) const {
    return record_[k] < 0 ? nullptr : &records[static_cast<std::size_t>(record_[k])];
  }
  std::optional<std::size_t> find_local(std::int64_t local_minutes) const {
    const auto it = by_local_.find(local_minutes);
    if (it == by_local_.end()) return std::nullopt;
    return it->second;
  }

 private:
  int step_;
  std::vector<long> record_;
  std::vector<Timestamp> time_;
  std::unordered_map<std::int64_t, std::size_t> by_local_;
};

struct Event {
  std::int64_t local_minutes;
  int horizon;
};

std::vector<Event> prediction_events(const SlotGrid& grid, const RunConfig& cfg) {
  std::vector<Event> events;
  if (!cfg.schedule.empty()) {
    for (const ScheduledPrediction& p : cfg.schedule) {
      events.push_back({make_timestamp(p.date, 0).local_minutes + p.minute_of_day, p.horizon});
    }
    return events;
  }
  const auto first = grid.time(0).local_date();
  const auto last = grid.time(grid.size() - 1).local_date();
  for (auto d = first; d <= last; d += std::chrono::days{1}) {
    events.push_back({make_timestamp(d, 0).local_minutes + cfg.prediction_minute_of_day, cfg.hp.horizon});
  }
  return events;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunResult run_online_evaluation(const std::vector<SeriesRecord>& records, const RunConfig& config,
                                const RunOptions& options) {
  const HyperParams& hp = config.hp;
  hp.validate();
  if (hp.calendar_types != kHourlyCalendarTypes) throw InvalidArgument("the harness uses 48 hourly calendar types");
  if (!config.train_end) throw InputError("config: train_end is required");
  if (records.empty()) throw EmptySpan("no records");

  const SlotGrid grid(records, config.step_minutes);
  RunResult result;

  OnlineModel model = options.resume ? options.resume->model
                                     : OnlineModel(hp, kObservationFeatures, config.init_mode);
  std::size_t next_slot = 0;
  std::optional<double> previous_load;
  std::optional<Timestamp> resumed_through;
  if (options.resume && options.resume->learned_through) {
    resumed_through = options.resume->learned_through;
    while (next_slot < grid.size() && grid.time(next_slot) <= *resumed_through) ++next_slot;
    if (next_slot > 0) {
      if (const SeriesRecord* r = grid.record(records, next_slot - 1)) previous_load = r->load;
    } else if (grid.time(0).utc_minutes() - resumed_through->utc_minutes() == config.step_minutes) {
      previous_load = options.resume->last_load;
    }
  }

  auto learn_until = [&](std::size_t last_slot) {
    if (options.frozen_after) {
      while (last_slot + 1 > next_slot && grid.time(last_slot) > *options.frozen_after) {
        if (last_slot == 0) return;
        --last_slot;
      }
    }
    const std::size_t chunk = static_cast<std::size_t>(hp.horizon);
    while (next_slot <= last_slot && next_slot < grid.size()) {
      const std::size_t end = std::min(last_slot + 1, next_slot + chunk);
      std::vector<StepObservation> steps;
      std::vector<std::optional<double>> targets;
      for (std::size_t k = next_slot; k < end; ++k) {
        const SeriesRecord* r = grid.record(records, k);
        steps.push_back({grid.time(k), calendar_type(grid.time(k), config.holidays),
                         r ? r->temperature : std::nullopt, std::nullopt});
        targets.push_back(r ? std::optional<double>(r->load) : std::nullopt);
      }
      learn_sequence(model, previous_load, steps, targets, hp, &result.diagnostics);
      previous_load = targets.back();
      next_slot = end;
    }
  };

  std::vector<ScoredForecast> scored;
  std::optional<std::size_t> stop_slot;
  for (const Event& event : prediction_events(grid, config)) {
    const auto anchor = grid.find_local(event.local_minutes);
    if (!anchor) continue;
    const Timestamp& anchor_time = grid.time(*anchor);
    if (anchor_time < *config.train_end) continue;
    if (config.test_end && anchor_time > *config.test_end) break;
    if (resumed_through && anchor_time < *resumed_through) continue;
    if (*anchor + static_cast<std::size_t>(event.horizon) >= grid.size()) {
      stop_slot = *anchor;
      break;
    }

    const SeriesRecord* anchor_record = grid.record(records, *anchor);
    if (!anchor_record) {
      ++result.skipped_days;
      continue;
    }

    learn_until(*anchor);

    InstanceVector instance;
    instance.anchor_time = anchor_time;
    instance.anchor_load = anchor_record->load;
    for (int i = 1; i <= event.horizon; ++i) {
      const std::size_t k = *anchor + static_cast<std::size_t>(i);
      const SeriesRecord* r = grid.record(records, k);
      instance.steps.push_back({grid.time(k), calendar_type(grid.time(k), config.holidays),
                                r ? r->temperature : std::nullopt, std::nullopt});
    }
    HyperParams step_hp = hp;
    step_hp.horizon = event.horizon;
    const Prediction prediction = predict(model, instance, step_hp);
    ++result.predictions;
    result.cold_start_fallbacks += prediction.fallbacks.size();
    result.unconditioned_steps += static_cast<std::size_t>(prediction.unconditioned_steps);

    for (const ForecastPoint& point : prediction.path.points) {
      const std::size_t k = *anchor + static_cast<std::size_t>(point.step);
      const SeriesRecord* r = grid.record(records, k);
      ForecastRow row{anchor_time, point.time, point.step, point.mean, point.std, std::nullopt};
      if (r) {
        row.actual = r->load;
        scored.push_back({r->load, point});
      } else {
        ++result.points_without_actual;
      }
      result.rows.push_back(row);
    }
  }

  if (result.predictions == 0 && !stop_slot) throw EmptySpan("no prediction falls inside the test span");

  learn_until(stop_slot ? *stop_slot : grid.size() - 1);

  if (!scored.empty()) {
    const auto grid_levels = default_quantile_grid();
    result.report = evaluate(scored, grid_levels);
  }
  for (const CalendarParams& entry : model.params.entries()) {
    if (std::abs(entry.s_channel.eta[1]) > 1.0) ++result.steep_transitions;
  }

  result.final_state.hp = hp;
  result.final_state.model = std::move(model);
  if (next_slot > 0) {
    result.final_state.learned_through = grid.time(next_slot - 1);
    result.final_state.last_load = previous_load;
  } else if (resumed_through) {
    result.final_state.learned_through = resumed_through;
    result.final_state.last_load = options.resume->last_load;
  }
  return result;
}

std::string forecasts_csv(const RunResult& result, bool with_quantiles) {
  const auto levels = default_quantile_grid();
  std::string out = "issued_at,timestamp,horizon,mean,std";
  if (with_quantiles) {
    char buf[8];
    for (int k = 1; k <= 99; ++k) {
      std::snprintf(buf, sizeof buf, ",q%02d", k);
      out += buf;
    }
  }
  out += '\n';
  for (const ForecastRow& row : result.rows) {
    out += format_timestamp(row.issued_at) + "," + format_timestamp(row.time) + "," +
           std::to_string(row.horizon) + "," + fmt(row.mean) + "," + fmt(row.std);
    if (with_quantiles) {
      const ForecastPoint p{row.mean, row.std, row.horizon, row.time};
      for (double q : levels) out += "," + fmt(quantile(p, q));
    }
    out += '\n';
  }
  return out;
}

std::string run_report(const RunResult& result, const RunConfig& config, std::size_t gaps,
                       std::size_t missing_temperatures) {
  std::string out;
  out += "load_unit = " + config.load_unit + "\n";
  out += "predictions = " + std::to_string(result.predictions) + "\n";
  out += "skipped_days = " + std::to_string(result.skipped_days) + "\n";
  out += "points_without_actual = " + std::to_string(result.points_without_actual) + "\n";
  out += "gaps = " + std::to_string(gaps) + "\n";
  out += "missing_temperatures = " + std::to_string(missing_temperatures) + "\n";
  out += "cold_start_fallbacks = " + std::to_string(result.cold_start_fallbacks) + "\n";
  out += "unconditioned_steps = " + std::to_string(result.unconditioned_steps) + "\n";
  out += "learner_updates = " + std::to_string(result.diagnostics.updates) + "\n";
  out += "radicand_clamps = " + std::to_string(result.diagnostics.radicand_clamps) + "\n";
  out += "trace_resets = " + std::to_string(result.diagnostics.trace_resets) + "\n";
  out += "observation_channel_skips = " + std::to_string(result.diagnostics.r_channel_skips) + "\n";
  out += "steep_transitions = " + std::to_string(result.steep_transitions) + "\n";
  if (result.report) out += format_report(*result.report);
  return out;
}

void write_outputs(const RunResult& result, const RunConfig& config, std::size_t gaps,
                   std::size_t missing_temperatures) {
  std::filesystem::create_directories(config.output_dir);
  auto write = [&](const char* name, const std::string& text) {
    const auto path = config.output_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
  };
  write("forecasts.csv", forecasts_csv(result, config.write_quantiles));
  write("report.txt", run_report(result, config, gaps, missing_temperatures));
  write("calibration.csv", result.report ? format_calibration_csv(*result.report) : "q,calibration\n");
}

}  // namespace aplf::harness
