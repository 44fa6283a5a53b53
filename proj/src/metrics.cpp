#include "aplf/metrics.hpp"

#include "aplf/forecaster.hpp"

#include <cmath>
#include <cstdio>

namespace aplf {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double abs_error(double s, double s_hat) { return std::abs(s - s_hat); }

double rmse(std::span<const PointPair> pairs) {
  if (pairs.empty()) throw EmptyInput("rmse of an empty set");
  CompensatedSum acc;
  for (const PointPair& p : pairs) {
    const double e = p.actual - p.predicted;
    acc.add(e * e);
  }
  return std::sqrt(acc.value() / static_cast<double>(pairs.size()));
}

MapeResult mape(std::span<const PointPair> pairs) {
  MapeResult out;
  CompensatedSum acc;
  std::size_t used = 0;
  for (const PointPair& p : pairs) {
    if (p.actual == 0.0) {
      ++out.excluded;
      continue;
    }
    acc.add(std::abs(p.actual - p.predicted) / std::abs(p.actual));
    ++used;
  }
  if (used == 0) throw EmptyInput("mape needs at least one non-zero actual");
  out.percent = 100.0 * acc.value() / static_cast<double>(used);
  return out;
}

double pinball(double s, double s_hat_q, double q) {
  return s >= s_hat_q ? q * (s - s_hat_q) : (1.0 - q) * (s_hat_q - s);
}

Calibration calibration_and_ece(std::span<const ScoredForecast> samples, std::span<const double> q_grid) {
  if (samples.empty() || q_grid.empty()) throw EmptyInput("calibration needs samples and a quantile grid");
  Calibration out;
  out.curve.reserve(q_grid.size());
  CompensatedSum deviation;
  for (double q : q_grid) {
    std::size_t below = 0;
    for (const ScoredForecast& x : samples) {
      if (x.actual <= quantile(x.forecast, q)) ++below;
    }
    const double c = static_cast<double>(below) / static_cast<double>(samples.size());
    out.curve.emplace_back(q, c);
    deviation.add(std::abs(q - c));
  }
  out.ece = deviation.value() / static_cast<double>(q_grid.size());
  return out;
}

double mean_pinball(std::span<const ScoredForecast> samples, std::span<const double> q_grid) {
  if (samples.empty() || q_grid.empty()) throw EmptyInput("pinball needs samples and a quantile grid");
  CompensatedSum acc;
  for (const ScoredForecast& x : samples) {
    for (double q : q_grid) acc.add(pinball(x.actual, quantile(x.forecast, q), q));
  }
  return acc.value() / (static_cast<double>(samples.size()) * static_cast<double>(q_grid.size()));
}

EvalReport evaluate(std::span<const ScoredForecast> samples, std::span<const double> q_grid) {
  if (samples.empty()) throw EmptyInput("nothing to evaluate");
  std::vector<PointPair> pairs;
  pairs.reserve(samples.size());
  for (const ScoredForecast& x : samples) pairs.push_back({x.actual, x.forecast.mean});

  EvalReport report;
  report.n_points = samples.size();
  report.rmse = rmse(pairs);
  try {
    const MapeResult m = mape(pairs);
    report.mape = m.percent;
    report.mape_excluded = m.excluded;
  } catch (const EmptyInput&) {
    report.mape = std::nan("");
    report.mape_excluded = pairs.size();
  }
  report.mean_pinball = mean_pinball(samples, q_grid);
  Calibration cal = calibration_and_ece(samples, q_grid);
  report.calibration_curve = std::move(cal.curve);
  report.ece = cal.ece;
  return report;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string format_report(const EvalReport& report) {
  std::string out;
  out += "n_points = " + std::to_string(report.n_points) + "\n";
  out += "rmse = " + fmt(report.rmse) + "\n";
  out += "mape_percent = " + fmt(report.mape) + "\n";
  out += "mape_excluded = " + std::to_string(report.mape_excluded) + "\n";
  out += "mean_pinball = " + fmt(report.mean_pinball) + "\n";
  out += "ece = " + fmt(report.ece) + "\n";
  out += "quantile_levels = " + std::to_string(report.calibration_curve.size()) + "\n";
  return out;
}

std::string format_calibration_csv(const EvalReport& report) {
  std::string out = "q,calibration\n";
  for (const auto& [q, c] : report.calibration_curve) out += fmt(q) + "," + fmt(c) + "\n";
  return out;
}

}  // namespace aplf
