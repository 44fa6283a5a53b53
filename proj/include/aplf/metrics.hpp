#pragma once

#include "aplf/model_types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aplf {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct PointPair {
  double actual = 0.0;
  double predicted = 0.0;
};

struct ScoredForecast {
  double actual = 0.0;
  ForecastPoint forecast;
};

double abs_error(double s, double s_hat);

/// Throws EmptyInput on an empty set.
double rmse(std::span<const PointPair> pairs);

struct MapeResult {
  double percent = 0.0;
  // Pairs with a zero actual, left out of the mean.
  std::size_t excluded = 0;
};

/// Throws EmptyInput when no pair has a non-zero actual.
MapeResult mape(std::span<const PointPair> pairs);

double pinball(double s, double s_hat_q, double q);

struct Calibration {
  std::vector<std::pair<double, double>> curve;  // (q, C(q))
  double ece = 0.0;
};

/// C(q) is the fraction of samples at or below their q-quantile forecast;
/// ECE is the mean of |q - C(q)| over the grid.
Calibration calibration_and_ece(std::span<const ScoredForecast> samples, std::span<const double> q_grid);

/// Pinball loss averaged over all samples and grid levels.
double mean_pinball(std::span<const ScoredForecast> samples, std::span<const double> q_grid);

struct EvalReport {
  double rmse = 0.0;
  double mape = 0.0;
  std::size_t mape_excluded = 0;
  double mean_pinball = 0.0;
  std::vector<std::pair<double, double>> calibration_curve;
  double ece = 0.0;
  std::size_t n_points = 0;
};

EvalReport evaluate(std::span<const ScoredForecast> samples, std::span<const double> q_grid);

/// "key = value" lines; the calibration curve is written separately.
std::string format_report(const EvalReport& report);

/// "q,calibration" header plus one row per grid level.
std::string format_calibration_csv(const EvalReport& report);

}  // namespace aplf
