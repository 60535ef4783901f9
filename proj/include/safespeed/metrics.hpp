#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "safespeed/pipeline.hpp"

namespace safespeed {

struct Interval {
  double lo = 0;
  double hi = 0;
};

// Fraction of observations falling inside their paired closed interval.
double picp(const std::vector<double>& observed, const std::vector<Interval>& intervals);

// Mean interval width.
double mpiw(const std::vector<Interval>& intervals);

// Mean absolute error between paired predictions and observations.
double mae(const std::vector<double>& predicted, const std::vector<double>& observed);

// Percentage of predictions within delta_mph (inclusive) of the observation.
double threshold_accuracy(const std::vector<double>& predicted, const std::vector<double>& observed,
                          double delta_mph);

// Posted-limit band: v_law plus/minus pct of v_law, point prediction v_law.
struct PostedBand {
  Interval interval;
  double predictor = 0;
};
PostedBand posted_band(double v_law_mph, double pct);

// IQR of all vehicle mean speeds pooled from the lookback_windows calendar
// windows immediately before target_window. Empty pool yields no value.
std::optional<Quantiles> rolling_iqr(const std::vector<WindowRecord>& records,
                                     int lookback_windows, std::int64_t target_window);

struct WindowPrediction {
  double predictor = 0;  // compared against the observed median
  Interval interval;
};

struct MetricsBlock {
  double picp_50 = 0;
  double mpiw = 0;
  double mae = 0;
  std::map<double, double> accuracy_at;  // delta mph -> percent
  std::size_t n_vehicle_samples = 0;
  std::size_t n_windows = 0;
};

struct EvalReport {
  MetricsBlock overall;
  std::map<std::string, MetricsBlock> by_weather;
  std::size_t n_windows_excluded = 0;  // windows the method produced no prediction for
};

// PICP is vehicle-level (every sample against its window interval); MPIW, MAE
// and threshold accuracy are window-level. Windows absent from predictions
// are excluded and counted; predictions for unknown windows are an error.
EvalReport evaluate(const std::vector<WindowRecord>& records,
                    const std::map<std::int64_t, WindowPrediction>& predictions,
                    const std::map<std::int64_t, std::string>& weather_group,
                    const std::vector<double>& accuracy_deltas);

struct MethodReport {
  std::string method;
  EvalReport report;
};

// Machine output: method,scope,weather_group,metric,value rows.
std::string eval_report_csv(const std::vector<MethodReport>& methods);

// Human-readable fixed-width summary, overall block then per-weather blocks.
std::string eval_report_text(const std::vector<MethodReport>& methods);

}  // namespace safespeed
