#include "safespeed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace safespeed {

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_delta(double delta) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", delta);
  return buf;
}

void check_paired(std::size_t a, std::size_t b, const char* what) {
  if (a == 0) throw std::invalid_argument(std::string(what) + ": no observations");
  if (a != b) throw std::invalid_argument(std::string(what) + ": paired inputs differ in length");
}

}  // namespace

double picp(const std::vector<double>& observed, const std::vector<Interval>& intervals) {
  check_paired(observed.size(), intervals.size(), "picp");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < observed.size(); ++i)
    if (observed[i] >= intervals[i].lo && observed[i] <= intervals[i].hi) ++inside;
  return static_cast<double>(inside) / static_cast<double>(observed.size());
}

double mpiw(const std::vector<Interval>& intervals) {
  if (intervals.empty()) throw std::invalid_argument("mpiw: no intervals");
  double total = 0;
  for (const Interval& iv : intervals) {
    if (iv.hi < iv.lo) throw std::invalid_argument("mpiw: interval upper bound below lower");
    total += iv.hi - iv.lo;
  }
  return total / static_cast<double>(intervals.size());
}

double mae(const std::vector<double>& predicted, const std::vector<double>& observed) {
  check_paired(predicted.size(), observed.size(), "mae");
  double total = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) total += std::abs(predicted[i] - observed[i]);
  return total / static_cast<double>(predicted.size());
}

double threshold_accuracy(const std::vector<double>& predicted, const std::vector<double>& observed,
                          double delta_mph) {
  check_paired(predicted.size(), observed.size(), "threshold_accuracy");
  if (delta_mph < 0) throw std::invalid_argument("threshold_accuracy: delta must be non-negative");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (std::abs(predicted[i] - observed[i]) <= delta_mph) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(predicted.size());
}

PostedBand posted_band(double v_law_mph, double pct) {
  if (!(v_law_mph > 0)) throw std::invalid_argument("posted_band: legal limit must be positive");
  if (pct < 0 || pct >= 1) throw std::invalid_argument("posted_band: pct must lie in [0, 1)");
  PostedBand band;
  // Bounds are formed from the margin, not by scaling v_law by (1 +- pct);
  // the two differ in the last bits and the margin form is the exact one.
  const double margin = v_law_mph * pct;
  band.interval.lo = v_law_mph - margin;
  band.interval.hi = v_law_mph + margin;
  band.predictor = v_law_mph;
  return band;
}

std::optional<Quantiles> rolling_iqr(const std::vector<WindowRecord>& records,
                                     int lookback_windows, std::int64_t target_window) {
  if (lookback_windows < 1)
    throw std::invalid_argument("rolling_iqr: lookback must be at least one window");
  const std::int64_t first = target_window - lookback_windows;
  std::vector<double> pool;
  for (const WindowRecord& rec : records) {
    if (rec.window_index < first || rec.window_index >= target_window) continue;
    for (const WindowSample& sample : rec.samples) pool.push_back(sample.mean_speed_mph);
  }
  if (pool.empty()) return std::nullopt;
  Quantiles q;
  q.q25 = interpolated_quantile(pool, 0.25);
  q.q50 = interpolated_quantile(pool, 0.50);
  q.q75 = interpolated_quantile(pool, 0.75);
  return q;
}

namespace {

struct GroupAcc {
  std::vector<double> pred, obs;
  std::vector<Interval> intervals;
  std::vector<double> veh_speeds;
  std::vector<Interval> veh_intervals;
};

MetricsBlock finish_block(const GroupAcc& acc, const std::vector<double>& deltas) {
  MetricsBlock block;
  block.picp_50 = picp(acc.veh_speeds, acc.veh_intervals);
  block.mpiw = mpiw(acc.intervals);
  block.mae = mae(acc.pred, acc.obs);
  for (double d : deltas) block.accuracy_at[d] = threshold_accuracy(acc.pred, acc.obs, d);
  block.n_vehicle_samples = acc.veh_speeds.size();
  block.n_windows = acc.intervals.size();
  return block;
}

}  // namespace

EvalReport evaluate(const std::vector<WindowRecord>& records,
                    const std::map<std::int64_t, WindowPrediction>& predictions,
                    const std::map<std::int64_t, std::string>& weather_group,
                    const std::vector<double>& accuracy_deltas) {
  if (records.empty()) throw std::invalid_argument("evaluate: no windows");

  std::set<std::int64_t> known;
  for (const WindowRecord& rec : records) known.insert(rec.window_index);
  std::string orphans;
  std::size_t n_orphans = 0;
  for (const auto& entry : predictions) {
    if (known.count(entry.first)) continue;
    ++n_orphans;
    if (n_orphans <= 8) {
      if (!orphans.empty()) orphans += ", ";
      orphans += std::to_string(entry.first);
    }
  }
  if (n_orphans > 0)
    throw std::invalid_argument("evaluate: predictions reference " + std::to_string(n_orphans) +
                                " unknown windows: " + orphans +
                                (n_orphans > 8 ? ", ..." : ""));

  EvalReport report;
  GroupAcc overall;
  std::map<std::string, GroupAcc> groups;
  for (const WindowRecord& rec : records) {
    const auto pred = predictions.find(rec.window_index);
    if (pred == predictions.end()) {
      ++report.n_windows_excluded;
      continue;
    }
    const auto group_it = weather_group.find(rec.window_index);
    const std::string group = group_it == weather_group.end() ? "unknown" : group_it->second;
    GroupAcc* accs[2] = {&overall, &groups[group]};
    for (GroupAcc* acc : accs) {
      acc->pred.push_back(pred->second.predictor);
      acc->obs.push_back(rec.observed_q50);
      acc->intervals.push_back(pred->second.interval);
      for (const WindowSample& sample : rec.samples) {
        acc->veh_speeds.push_back(sample.mean_speed_mph);
        acc->veh_intervals.push_back(pred->second.interval);
      }
    }
  }
  if (overall.intervals.empty())
    throw std::invalid_argument("evaluate: method produced no predictions for any window");

  report.overall = finish_block(overall, accuracy_deltas);
  for (const auto& entry : groups) report.by_weather[entry.first] = finish_block(entry.second, accuracy_deltas);
  return report;
}

namespace {

void emit_block_csv(std::string& out, const std::string& method, const std::string& scope,
                    const std::string& group, const MetricsBlock& block) {
  const auto row = [&](const std::string& metric, const std::string& value) {
    out += method + ',' + scope + ',' + group + ',' + metric + ',' + value + '\n';
  };
  row("picp_50", fmt6(block.picp_50));
  row("mpiw", fmt6(block.mpiw));
  row("mae", fmt6(block.mae));
  for (const auto& entry : block.accuracy_at)
    row("accuracy_" + fmt_delta(entry.first), fmt6(entry.second));
  row("n_windows", std::to_string(block.n_windows));
  row("n_vehicle_samples", std::to_string(block.n_vehicle_samples));
}

}  // namespace

std::string eval_report_csv(const std::vector<MethodReport>& methods) {
  std::string out = "method,scope,weather_group,metric,value\n";
  for (const MethodReport& m : methods) {
    emit_block_csv(out, m.method, "overall", "", m.report.overall);
    out += m.method + ",overall,,n_windows_excluded," +
           std::to_string(m.report.n_windows_excluded) + '\n';
    for (const auto& entry : m.report.by_weather)
      emit_block_csv(out, m.method, "weather", entry.first, entry.second);
  }
  return out;
}

std::string eval_report_text(const std::vector<MethodReport>& methods) {
  if (methods.empty()) throw std::invalid_argument("eval_report_text: no methods");
  std::vector<double> deltas;
  for (const auto& entry : methods.front().report.overall.accuracy_at)
    deltas.push_back(entry.first);

  std::string out;
  char buf[256];
  const auto header = [&](const std::string& title) {
    out += title + '\n';
    std::snprintf(buf, sizeof(buf), "%-18s %10s %10s %10s", "method", "picp_50", "mpiw", "mae");
    out += buf;
    for (double d : deltas) {
      std::snprintf(buf, sizeof(buf), " %9s%%", ("acc<=" + fmt_delta(d)).c_str());
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), " %9s\n", "windows");
    out += buf;
  };
  const auto line = [&](const std::string& method, const MetricsBlock& block) {
    std::snprintf(buf, sizeof(buf), "%-18s %10.3f %10.2f %10.2f", method.c_str(), block.picp_50,
                  block.mpiw, block.mae);
    out += buf;
    for (double d : deltas) {
      const auto it = block.accuracy_at.find(d);
      std::snprintf(buf, sizeof(buf), " %10.1f", it == block.accuracy_at.end() ? 0.0 : it->second);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), " %9zu\n", block.n_windows);
    out += buf;
  };

  header("overall");
  for (const MethodReport& m : methods) line(m.method, m.report.overall);

  std::set<std::string> group_names;
  for (const MethodReport& m : methods)
    for (const auto& entry : m.report.by_weather) group_names.insert(entry.first);
  for (const std::string& group : group_names) {
    out += '\n';
    header("weather: " + group);
    for (const MethodReport& m : methods) {
      const auto it = m.report.by_weather.find(group);
      if (it != m.report.by_weather.end()) line(m.method, it->second);
    }
  }
  return out;
}

}  // namespace safespeed
