#include "aplf/harness/config.hpp"
#include "aplf/harness/evaluation.hpp"
#include "aplf/harness/series.hpp"
#include "aplf/harness/snapshot.hpp"
#include "aplf/metrics.hpp"
#include "aplf/oracles.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace aplf;
using namespace aplf::harness;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

CsvTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InputError("'" + path + "' is empty");
  t.header = split_row(line);
  for (auto& h : t.header) {
    for (auto& c : h) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    t.rows.push_back(split_row(line));
  }
  return t;
}

double to_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw InputError("bad " + what + " value '" + s + "'");
  }
}

int run_command(const std::string& data, const std::string& config_path, const std::string& frozen_after,
                const std::string& snapshot_out, const std::string& resume, const std::string& output_dir) {
  RunConfig config = load_config(config_path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  const IngestResult ingested = ingest_csv(std::filesystem::path(data), config.ingest_options());

  RunOptions options;
  if (!frozen_after.empty()) options.frozen_after = parse_timestamp(frozen_after);
  if (!resume.empty()) {
    options.resume = snapshot_load(resume, config.hp.calendar_types, kObservationFeatures);
  }
  const RunResult result = run_online_evaluation(ingested.records, config, options);
  write_outputs(result, config, ingested.gaps.size(), ingested.missing_temperatures);
  if (!snapshot_out.empty()) snapshot_save(result.final_state, snapshot_out);

  for (const Gap& g : ingested.gaps) {
    std::cerr << "gap after " << format_timestamp(g.after) << ": " << g.missing_steps << " missing step(s)\n";
  }
  std::cout << run_report(result, config, ingested.gaps.size(), ingested.missing_temperatures);
  return 0;
}

int self_check_command(unsigned seed) {
#if APLF_WITH_ORACLES
  bool ok = true;
  for (const oracle::SelfCheckResult& r : oracle::run_self_check(seed)) {
    std::printf("%-4s %-28s worst=%.3e tol=%.1e\n", r.passed ? "ok" : "FAIL", r.name.c_str(), r.worst_error,
                r.tolerance);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
#else
  (void)seed;
  std::cerr << "built without oracles\n";
  return 1;
#endif
}

int metrics_command(const std::string& forecasts_path, const std::string& actuals_path) {
  const CsvTable actuals = read_table(actuals_path);
  const int a_time = actuals.column("timestamp");
  const int a_load = actuals.column("load");
  if (a_time < 0 || a_load < 0) throw InputError("actuals need timestamp and load columns");
  std::map<std::int64_t, double> actual_at;
  for (const auto& row : actuals.rows) {
    if (row.size() <= static_cast<std::size_t>(std::max(a_time, a_load))) throw InputError("short row in actuals");
    actual_at[parse_timestamp(row[a_time]).utc_minutes()] = to_number(row[a_load], "load");
  }

  const CsvTable forecasts = read_table(forecasts_path);
  const int f_time = forecasts.column("timestamp");
  const int f_mean = forecasts.column("mean");
  const int f_std = forecasts.column("std");
  const int f_h = forecasts.column("horizon");
  if (f_time < 0 || f_mean < 0 || f_std < 0) throw InputError("forecasts need timestamp, mean and std columns");
  std::vector<ScoredForecast> scored;
  std::size_t unmatched = 0;
  for (const auto& row : forecasts.rows) {
    if (row.size() <= static_cast<std::size_t>(std::max({f_time, f_mean, f_std, f_h}))) {
      throw InputError("short row in forecasts");
    }
    const Timestamp t = parse_timestamp(row[f_time]);
    const auto it = actual_at.find(t.utc_minutes());
    if (it == actual_at.end()) {
      ++unmatched;
      continue;
    }
    ForecastPoint p;
    p.mean = to_number(row[f_mean], "mean");
    p.std = to_number(row[f_std], "std");
    if (!(p.std >= 0)) throw InputError("negative std in forecasts");
    p.step = f_h >= 0 ? static_cast<int>(to_number(row[f_h], "horizon")) : 0;
    p.time = t;
    scored.push_back({it->second, p});
  }
  if (scored.empty()) throw EmptyInput("no forecast matches an actual");
  const auto grid = default_quantile_grid();
  const EvalReport report = evaluate(scored, grid);
  std::cout << "unmatched_forecasts = " << unmatched << "\n" << format_report(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive probabilistic load forecasting"};
  app.require_subcommand(1);

  std::string data, config, frozen_after, snapshot_out, resume, output_dir;
  auto* run = app.add_subcommand("run", "Online learn/predict loop over a CSV series");
  run->add_option("--data", data, "timestamp,load[,temperature] CSV")->required();
  run->add_option("--config", config, "key = value configuration file")->required();
  run->add_option("--frozen-after", frozen_after, "stop learning after this timestamp");
  run->add_option("--snapshot-out", snapshot_out, "write the final learner state here");
  run->add_option("--resume", resume, "continue from a saved learner state");
  run->add_option("--output-dir", output_dir, "overrides output_dir from the config");

  unsigned seed = 20240601;
  auto* check = app.add_subcommand("self-check", "Compare fast paths against the reference oracles");
  check->add_option("--seed", seed);

  std::string forecasts, actuals;
  auto* metrics = app.add_subcommand("metrics", "Score a forecast CSV against actual loads");
  metrics->add_option("--forecasts", forecasts)->required();
  metrics->add_option("--actuals", actuals)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*run) return run_command(data, config, frozen_after, snapshot_out, resume, output_dir);
    if (*check) return self_check_command(seed);
    return metrics_command(forecasts, actuals);
  } catch (const NumericalError& e) {
    std::cerr << "aplf: numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InputError& e) {
    std::cerr << "aplf: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "aplf: " << e.what() << "\n";
    return kExitInput;
  }
}
