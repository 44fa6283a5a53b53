#include "aplf/harness/config.hpp"
#include "aplf/harness/evaluation.hpp"
#include "aplf/harness/series.hpp"
#include "aplf/harness/snapshot.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace aplf;
using namespace aplf::harness;

namespace {

IngestOptions mw(std::optional<TemperatureUnit> unit = TemperatureUnit::fahrenheit) {
  return {60, unit, "MW"};
}

IngestResult ingest(const std::string& text, const IngestOptions& options = mw()) {
  std::istringstream in(text);
  return ingest_csv(in, options);
}

// Hourly load with a daily cycle and a temperature that turns extreme on some days.
std::vector<SeriesRecord> synthetic_series(int days, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<SeriesRecord> out;
  const Timestamp start = parse_timestamp("2024-01-01T00:00Z");
  for (int k = 0; k < days * 24; ++k) {
    const int h = k % 24;
    const double w = 60 + 15 * std::sin(2 * M_PI * (h - 9) / 24.0) + 3 * n(rng) + (k / 24 % 5 == 3 ? 30 : 0);
    const double s = 500 + 120 * std::sin(2 * M_PI * (h - 6) / 24.0) + 2 * std::max(0.0, w - 80) + 8 * n(rng);
    out.push_back({start.plus_minutes(60LL * k), s, w});
  }
  return out;
}

RunConfig base_config() {
  RunConfig cfg;
  cfg.train_end = parse_timestamp("2024-01-08T00:00Z");
  cfg.load_unit = "MW";
  cfg.temperature_unit = TemperatureUnit::fahrenheit;
  return cfg;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("aplf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void check_same_model(const OnlineModel& a, const OnlineModel& b) {
  CHECK(a.params == b.params);
  CHECK(a.state == b.state);
  CHECK(a.tracker == b.tracker);
  CHECK(a.init_mode == b.init_mode);
  REQUIRE(a.s_warmup.size() == b.s_warmup.size());
  for (std::size_t i = 0; i < a.s_warmup.size(); ++i) {
    CHECK(a.s_warmup[i].pending == b.s_warmup[i].pending);
    REQUIRE(a.s_warmup[i].samples.size() == b.s_warmup[i].samples.size());
    for (std::size_t j = 0; j < a.s_warmup[i].samples.size(); ++j) {
      CHECK(a.s_warmup[i].samples[j].u == b.s_warmup[i].samples[j].u);
      CHECK(a.s_warmup[i].samples[j].s == b.s_warmup[i].samples[j].s);
    }
  }
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("well-formed file") {
    const IngestResult r = ingest(
        "timestamp,load,temperature\n"
        "2024-01-01T00:00Z,10,50\n"
        "2024-01-01T01:00Z,11,\n"
        "2024-01-01T02:00Z,12,52\n");
    REQUIRE(r.records.size() == 3);
    CHECK(r.records[1].load == 11);
    CHECK_FALSE(r.records[1].temperature.has_value());
    CHECK(*r.records[2].temperature == 52);
    CHECK(r.gaps.empty());
    CHECK(r.missing_temperatures == 1);
  }

  TEST_CASE("GEFCom2014 layout") {
    std::istringstream in(
        "ZONEID,TIMESTAMP,LOAD,w1,w2\n"
        "1,1/1/2001 1:00,100,40,42\n"
        "1,1012001 2:00,101,44,\n"
        "1,1/1/2001 5:00,,45,45\n"
        "1,1/1/2001 24:00,102,,\n");
    const IngestResult r = ingest_gefcom2014(in);
    REQUIRE(r.records.size() == 3);
    CHECK(format_timestamp(r.records[0].timestamp) == "2001-01-01T01:00Z");
    CHECK(*r.records[0].temperature == 41);
    CHECK(format_timestamp(r.records[1].timestamp) == "2001-01-01T02:00Z");
    CHECK(*r.records[1].temperature == 44);
    CHECK(format_timestamp(r.records[2].timestamp) == "2001-01-02T00:00Z");
    CHECK_FALSE(r.records[2].temperature.has_value());
    CHECK(r.missing_temperatures == 1);
    REQUIRE(r.gaps.size() == 1);
    CHECK(r.gaps[0].missing_steps == 21);
  }

  TEST_CASE("column order, case and Celsius conversion") {
    const IngestResult r = ingest(
        "Temperature,TIMESTAMP,Load\n"
        "100,2024-01-01T00:00Z,3\n",
        mw(TemperatureUnit::celsius));
    CHECK(*r.records[0].temperature == doctest::Approx(212));
    CHECK(r.records[0].load == 3);
  }

  TEST_CASE("out-of-order rows name the first offending line") {
    try {
      ingest(
          "timestamp,load\n"
          "2024-01-01T00:00Z,1\n"
          "2024-01-01T02:00Z,1\n"
          "2024-01-01T01:00Z,1\n"
          "2024-01-01T00:00Z,1\n");
      FAIL("expected NonMonotoneTimestamps");
    } catch (const NonMonotoneTimestamps& e) {
      CHECK(e.line() == 4);
    }
    CHECK_THROWS_AS(ingest("timestamp,load\n2024-01-01T00:00Z,1\n2024-01-01T00:00Z,2\n"), NonMonotoneTimestamps);
  }

  TEST_CASE("gap report") {
    const IngestResult r = ingest(
        "timestamp,load\n"
        "2024-01-01T00:00Z,1\n"
        "2024-01-01T02:00Z,1\n"
        "2024-01-01T03:00Z,1\n");
    CHECK(r.records.size() == 3);
    REQUIRE(r.gaps.size() == 1);
    CHECK(r.gaps[0].missing_steps == 1);
    CHECK(r.gaps[0].line == 3);
    CHECK(r.gaps[0].after == parse_timestamp("2024-01-01T00:00Z"));
  }

  TEST_CASE("malformed input") {
    CHECK_THROWS_AS(ingest("timestamp,load\n2024-01-01T00:00Z,abc\n"), ParseError);
    CHECK_THROWS_AS(ingest("timestamp,load\n2024-01-01T00:00Z,-1\n"), ParseError);
    CHECK_THROWS_AS(ingest("timestamp,load\n2024-01-01T00:30Z,1\n2024-01-01T01:00Z,1\n"), ParseError);
    CHECK_THROWS_AS(ingest("time,load\n2024-01-01T00:00Z,1\n"), ParseError);
    CHECK_THROWS_AS(ingest("timestamp,load\nnot-a-time,1\n"), ParseError);
    try {
      ingest("timestamp,load\n2024-01-01T00:00Z,1\n2024-01-01T01:00Z,x\n");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("undeclared units") {
    CHECK_THROWS_AS(ingest("timestamp,load\n2024-01-01T00:00Z,1\n", {60, std::nullopt, ""}), UnitMissing);
    CHECK_THROWS_AS(ingest("timestamp,load,temperature\n2024-01-01T00:00Z,1,3\n", mw(std::nullopt)),
                    UnitMissing);
    CHECK_NOTHROW(ingest("timestamp,load\n2024-01-01T00:00Z,1\n", mw(std::nullopt)));
  }

  TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config(
        "# comment\n"
        "lambda_s = 0.3\n"
        "LAMBDA_R=0.8  # trailing comment\n"
        "prediction_time = 09:30\n"
        "horizon = 36\n"
        "train_end = 2024-02-01T00:00Z\n"
        "holidays = 2024-01-01, 2024-12-25\n"
        "temperature_unit = C\n"
        "load_unit = GW\n"
        "init_mode = batch\n"
        "write_quantiles = yes\n");
    CHECK(cfg.hp.lambda_s == 0.3);
    CHECK(cfg.hp.lambda_r == 0.8);
    CHECK(cfg.prediction_minute_of_day == 570);
    CHECK(cfg.hp.horizon == 36);
    CHECK(cfg.holidays.size() == 2);
    CHECK(cfg.temperature_unit == TemperatureUnit::celsius);
    CHECK(cfg.load_unit == "GW");
    CHECK(cfg.init_mode == InitMode::batch);
    CHECK(cfg.write_quantiles);

    const RunConfig defaults = parse_config("");
    CHECK(defaults.hp.lambda_s == 0.2);
    CHECK(defaults.hp.lambda_r == 0.7);
    CHECK(defaults.hp.horizon == 24);
    CHECK(defaults.prediction_minute_of_day == 660);

    CHECK_THROWS_WITH_AS(parse_config("lambda_s = 0.2\nfoo = 1\n"), "config line 2: unknown key 'foo'", InputError);
    CHECK_THROWS_AS(parse_config("lambda_s = 1.5\n"), InputError);
    CHECK_THROWS_AS(parse_config("horizon = 0\n"), InputError);
    CHECK_THROWS_AS(parse_config("calendar_types = 24\n"), InputError);
    CHECK_THROWS_AS(parse_config("load_unit = W\n"), InputError);
    CHECK_THROWS_AS(parse_config("step_minutes = 7\n"), InputError);
    CHECK_THROWS_AS(parse_config("lambda_s\n"), InputError);
  }

  TEST_CASE("schedule parsing") {
    const auto s = parse_schedule("2024-01-03 09:00 12\n2024-01-02 11:00\n", 24);
    REQUIRE(s.size() == 2);
    CHECK(s[0].minute_of_day == 660);
    CHECK(s[0].horizon == 24);
    CHECK(s[1].horizon == 12);
    CHECK_THROWS_AS(parse_schedule("2024-01-03\n", 24), InputError);
    CHECK_THROWS_AS(parse_schedule("2024-01-03 09:00 0\n", 24), InputError);
  }

  TEST_CASE("snapshot round trip is bit-identical") {
    for (InitMode mode : {InitMode::zero, InitMode::batch}) {
      RunConfig cfg = base_config();
      cfg.init_mode = mode;
      const RunResult run = run_online_evaluation(synthetic_series(12), cfg);
      const std::string text = snapshot_to_string(run.final_state);
      const Snapshot back = snapshot_from_string(text, 48, kObservationFeatures);
      check_same_model(back.model, run.final_state.model);
      CHECK(back.learned_through == run.final_state.learned_through);
      CHECK(back.last_load == run.final_state.last_load);
      CHECK(back.hp.lambda_s == run.final_state.hp.lambda_s);
      CHECK(snapshot_to_string(back) == text);

      const auto path = scratch_dir("snapshot") / "state.json";
      snapshot_save(run.final_state, path);
      check_same_model(snapshot_load(path, 48, kObservationFeatures).model, run.final_state.model);
    }
  }

  TEST_CASE("snapshot refusals") {
    const RunResult run = run_online_evaluation(synthetic_series(10), base_config());
    const std::string text = snapshot_to_string(run.final_state);
    CHECK_THROWS_AS(snapshot_from_string(text, 48, 4), ShapeMismatch);
    CHECK_THROWS_AS(snapshot_from_string(text, 24, kObservationFeatures), ShapeMismatch);
    CHECK_THROWS_AS(snapshot_from_string(text.substr(0, text.size() / 2), 48, kObservationFeatures),
                    CorruptSnapshot);
    CHECK_THROWS_AS(snapshot_from_string("", 48, kObservationFeatures), CorruptSnapshot);

    std::string tampered = text;
    const auto pos = tampered.find("\"gamma\": ");
    REQUIRE(pos != std::string::npos);
    tampered.insert(pos + 9, "1");
    CHECK_THROWS_AS(snapshot_from_string(tampered, 48, kObservationFeatures), CorruptSnapshot);

    std::string future = text;
    const auto v = future.find("\"version\": 1");
    REQUIRE(v != std::string::npos);
    future.replace(v, 12, "\"version\": 9");
    CHECK_THROWS_AS(snapshot_from_string(future, 48, kObservationFeatures), VersionMismatch);

    const auto path = scratch_dir("truncated") / "state.json";
    {
      std::ofstream out(path);
      out << text.substr(0, 100);
    }
    CHECK_THROWS_AS(snapshot_load(path, 48, kObservationFeatures), CorruptSnapshot);
  }

  TEST_CASE("zero-length test span") {
    RunConfig cfg = base_config();
    cfg.train_end = parse_timestamp("2024-03-01T00:00Z");
    CHECK_THROWS_AS(run_online_evaluation(synthetic_series(10), cfg), EmptySpan);
    cfg.train_end = parse_timestamp("2024-01-05T12:00Z");
    cfg.test_end = parse_timestamp("2024-01-06T10:00Z");
    CHECK_THROWS_AS(run_online_evaluation(synthetic_series(10), cfg), EmptySpan);
    RunConfig no_split = base_config();
    no_split.train_end.reset();
    CHECK_THROWS_AS(run_online_evaluation(synthetic_series(10), no_split), InputError);
  }

  TEST_CASE("daily protocol") {
    const RunResult run = run_online_evaluation(synthetic_series(12), base_config());
    // Days 8..11 at 11:00; day 12 would need loads past the end of the data.
    CHECK(run.predictions == 4);
    REQUIRE(run.rows.size() == 96);
    CHECK(run.rows.front().issued_at == parse_timestamp("2024-01-08T11:00Z"));
    CHECK(run.rows.front().time == parse_timestamp("2024-01-08T12:00Z"));
    CHECK(run.rows.back().time == parse_timestamp("2024-01-12T11:00Z"));
    CHECK(run.report.has_value());
    CHECK(run.report->n_points == 96);
    CHECK(run.final_state.learned_through == parse_timestamp("2024-01-12T11:00Z"));
  }

  TEST_CASE("missing anchor loads are skipped and counted") {
    auto records = synthetic_series(12);
    const Timestamp anchor = parse_timestamp("2024-01-09T11:00Z");
    std::erase_if(records, [&](const SeriesRecord& r) { return r.timestamp == anchor; });
    const RunResult run = run_online_evaluation(records, base_config());
    CHECK(run.skipped_days == 1);
    CHECK(run.predictions == 3);
    // The missing hour is also a missing actual for the previous day's path.
    CHECK(run.points_without_actual == 1);
  }

  TEST_CASE("schedule with varying horizons") {
    RunConfig cfg = base_config();
    cfg.schedule = parse_schedule("2024-01-08 11:00 6\n2024-01-09 06:00 30\n2024-01-09 20:00\n", 24);
    const RunResult run = run_online_evaluation(synthetic_series(12), cfg);
    CHECK(run.predictions == 3);
    CHECK(run.rows.size() == 6 + 30 + 24);
    CHECK(run.rows[6].issued_at == parse_timestamp("2024-01-09T06:00Z"));
    CHECK(run.rows[6 + 29].horizon == 30);
  }

  TEST_CASE("deterministic replay") {
    RunConfig cfg = base_config();
    const auto records = synthetic_series(15);
    const std::string a = forecasts_csv(run_online_evaluation(records, cfg), true);
    const std::string b = forecasts_csv(run_online_evaluation(records, cfg), true);
    CHECK(a == b);
    CHECK(a.rfind("issued_at,timestamp,horizon,mean,std,q01,", 0) == 0);

    cfg.output_dir = scratch_dir("replay");
    const RunResult run = run_online_evaluation(records, cfg);
    write_outputs(run, cfg, 0, 0);
    CHECK(std::filesystem::exists(cfg.output_dir / "forecasts.csv"));
    CHECK(std::filesystem::exists(cfg.output_dir / "report.txt"));
    CHECK(std::filesystem::exists(cfg.output_dir / "calibration.csv"));
  }

  TEST_CASE("resuming from a snapshot reproduces the uninterrupted run") {
    for (InitMode mode : {InitMode::zero, InitMode::batch}) {
      RunConfig cfg = base_config();
      cfg.init_mode = mode;
      const auto records = synthetic_series(16);
      const std::string full = forecasts_csv(run_online_evaluation(records, cfg), false);
      // Split at midnight, at the prediction time and mid-afternoon of several days.
      for (int day = 9; day <= 14; ++day) {
        for (int minute : {0, 11 * 60, 15 * 60 + 0}) {
          const Timestamp cut = parse_timestamp("2024-01-01T00:00Z").plus_minutes(1440LL * (day - 1) + minute);
          std::vector<SeriesRecord> head;
          for (const auto& r : records) {
            if (r.timestamp <= cut) head.push_back(r);
          }
          const RunResult first = run_online_evaluation(head, cfg);
          const Snapshot saved = snapshot_from_string(snapshot_to_string(first.final_state), 48, kObservationFeatures);
          RunOptions options;
          options.resume = saved;
          const RunResult second = run_online_evaluation(records, cfg, options);
          std::string joined = forecasts_csv(first, false);
          const std::string tail = forecasts_csv(second, false);
          joined += tail.substr(tail.find('\n') + 1);
          CAPTURE(day);
          CAPTURE(minute);
          CHECK(joined == full);
        }
      }
    }
  }

  TEST_CASE("no load after the prediction time influences a forecast") {
    const auto records = synthetic_series(14);
    const RunConfig cfg = base_config();
    const RunResult clean = run_online_evaluation(records, cfg);
    for (std::size_t p = 0; p < clean.predictions; ++p) {
      const Timestamp issued = clean.rows[p * 24].issued_at;
      auto tainted = records;
      for (auto& r : tainted) {
        if (r.timestamp > issued) r.load += 1e6;
      }
      const RunResult run = run_online_evaluation(tainted, cfg);
      std::size_t compared = 0;
      for (std::size_t i = 0; i < run.rows.size(); ++i) {
        if (run.rows[i].issued_at > issued) break;
        CHECK(run.rows[i].mean == clean.rows[i].mean);
        CHECK(run.rows[i].std == clean.rows[i].std);
        ++compared;
      }
      CHECK(compared == (p + 1) * 24);
      // The taint is visible once it becomes history.
      if (p + 1 < clean.predictions) CHECK(run.rows[compared].mean != clean.rows[compared].mean);
    }
  }

  TEST_CASE("frozen run stops learning") {
    const auto records = synthetic_series(14);
    const RunConfig cfg = base_config();
    RunOptions frozen;
    frozen.frozen_after = *cfg.train_end;
    const RunResult a = run_online_evaluation(records, cfg, frozen);
    // 169 hours through the freeze: 168 load transitions and 169 observations.
    CHECK(a.diagnostics.updates == 168 + 169);
    CHECK(a.final_state.learned_through == *cfg.train_end);
    const RunResult b = run_online_evaluation(records, cfg);
    CHECK(b.diagnostics.updates > a.diagnostics.updates);
    CHECK(a.rows.size() == b.rows.size());
  }
}
