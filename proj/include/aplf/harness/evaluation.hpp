#pragma once

#include "aplf/forecaster.hpp"
#include "aplf/harness/config.hpp"
#include "aplf/harness/series.hpp"
#include "aplf/harness/snapshot.hpp"
#include "aplf/metrics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aplf::harness {

class EmptySpan : public InputError {
 public:
  using InputError::InputError;
};

struct RunOptions {
  // Stop learning after this time (offline ablation).
  std::optional<Timestamp> frozen_after;
  // Continue from a saved learner instead of a fresh one.
  std::optional<Snapshot> resume;
};

struct ForecastRow {
  Timestamp issued_at;
  Timestamp time;
  int horizon = 0;
  double mean = 0.0;
  double std = 0.0;
  std::optional<double> actual;
};

struct RunResult {
  std::vector<ForecastRow> rows;
  std::optional<EvalReport> report;  // absent when no forecast has an actual
  std::size_t predictions = 0;
  std::size_t skipped_days = 0;  // missing anchor load
  std::size_t points_without_actual = 0;
  std::size_t cold_start_fallbacks = 0;
  std::size_t unconditioned_steps = 0;
  std::size_t steep_transitions = 0;  // calendar types with |slope| > 1 at the end
  LearnerDiagnostics diagnostics;
  Snapshot final_state;
};

/// The online loop: before each scheduled prediction the learner consumes
/// every revealed load up to the prediction time, then forecasts the next
/// horizon from the latest model. After the last prediction the learner
/// consumes the remaining data, stopping at the first prediction time whose
/// horizon runs past the data so that a resumed run can issue it. Throws
/// EmptySpan when no prediction falls in the test span.
RunResult run_online_evaluation(const std::vector<SeriesRecord>& records, const RunConfig& config,
                                const RunOptions& options = {});

/// issued_at,timestamp,horizon,mean,std[,q01..q99]
std::string forecasts_csv(const RunResult& result, bool with_quantiles);

/// Key-value report including run counters.
std::string run_report(const RunResult& result, const RunConfig& config, std::size_t gaps,
                       std::size_t missing_temperatures);

/// Writes forecasts.csv, report.txt and calibration.csv into config.output_dir.
void write_outputs(const RunResult& result, const RunConfig& config, std::size_t gaps,
                   std::size_t missing_temperatures);

}  // namespace aplf::harness
