#include "safespeed/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>

#include "json.hpp"
#include "safespeed/csv.hpp"
#include "safespeed/envelope.hpp"
#include "safespeed/geo.hpp"
#include "safespeed/metrics.hpp"
#include "safespeed/time_utils.hpp"

namespace safespeed {

namespace {

std::string resolved(const std::string& explicit_path, const std::string& out_dir,
                     const char* name) {
  return explicit_path.empty() ? out_dir + "/" + name : explicit_path;
}

FeatureSchema load_schema(const RunConfig& config) {
  if (config.feature_schema_path.empty()) return FeatureSchema::default_schema();
  return FeatureSchema::from_json_file(config.feature_schema_path);
}

std::vector<WindowRecord> load_records(const RunConfig& config, const FeatureSchema& schema) {
  return load_window_records(config.out_dir + "/windows.csv", config.out_dir + "/samples.csv",
                             schema);
}

// First observation of a window wins, mirroring the alignment stage.
std::map<std::int64_t, RwisObservation> weather_by_window(
    const std::vector<RwisObservation>& observations) {
  std::map<std::int64_t, RwisObservation> by_window;
  for (const RwisObservation& obs : observations)
    by_window.emplace(window_index(obs.observed_at), obs);
  return by_window;
}

std::vector<WindowRecord> select_test(const std::vector<WindowRecord>& records,
                                      const RunConfig& config) {
  std::vector<WindowRecord> out;
  for (const WindowRecord& rec : records) {
    const bool in_train = window_in_ranges(rec.window_index, config.train_ranges);
    if (!config.test_ranges.empty()) {
      if (!window_in_ranges(rec.window_index, config.test_ranges)) continue;
      if (in_train)
        throw std::runtime_error("config error: test_ranges overlap train_ranges at window " +
                                 std::to_string(rec.window_index));
      out.push_back(rec);
    } else if (!config.train_ranges.empty()) {
      if (!in_train) out.push_back(rec);
    } else {
      out.push_back(rec);
    }
  }
  return out;
}

struct WindowOutput {
  const WindowRecord* record = nullptr;
  Quantiles q;
  EnvelopeResult env;
  SpeedInterval interval;
};

std::vector<WindowOutput> forest_outputs(const Forest& forest,
                                         const std::vector<WindowRecord>& test,
                                         const std::map<std::int64_t, RwisObservation>& weather,
                                         const RunConfig& config) {
  std::vector<WindowOutput> outputs;
  outputs.reserve(test.size());
  for (const WindowRecord& rec : test) {
    const auto obs = weather.find(rec.window_index);
    if (obs == weather.end())
      throw std::runtime_error("validation error: no weather observation for window " +
                               std::to_string(rec.window_index));
    WindowOutput out;
    out.record = &rec;
    out.q = forest.predict_window(rec.features);
    out.env = solve_v_phys(obs->second.grip, obs->second.visibility_m,
                           config.physics(obs->second.grip));
    out.interval = fuse(out.q.q25, out.q.q75, out.env.v_phys_mph, config.v_law_mph);
    outputs.push_back(out);
  }
  return outputs;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void cmd_synth(const RunConfig& config) {
  if (!config.has_synth)
    throw std::runtime_error("config error: missing key 'synth' (nothing to generate)");
  const SynthSummary summary = generate_scenario(config.synth, config.out_dir);
  std::cout << "generated " << summary.n_windows << " windows: " << summary.n_cv_rows
            << " probe rows, " << summary.n_rwis_rows << " weather rows, "
            << summary.n_vehicle_windows << " vehicle-windows (" << summary.n_decoys
            << " decoys)\n"
            << "data: " << config.out_dir << "\n";
}

void cmd_prepare(const RunConfig& config) {
  const std::string cv_path = resolved(config.cv_path, config.out_dir, "cv.csv");
  const std::string rwis_path = resolved(config.rwis_path, config.out_dir, "rwis.csv");
  const std::string network_path = resolved(config.network_path, config.out_dir, "network.geojson");
  const FeatureSchema schema = load_schema(config);

  const CvParseResult cv = parse_cv(cv_path);
  const RwisParseResult rwis = parse_rwis(rwis_path, config.rain_codes);

  const std::vector<RoadSegment> network = load_network_geojson(network_path);
  std::vector<RoadSegment> usable;
  for (const RoadSegment& seg : network)
    if (!is_excluded(seg, config.v_law_mph)) usable.push_back(seg);
  if (usable.empty())
    throw std::runtime_error("validation error: network has no usable segments after exclusions");
  const SegmentMatcher matcher(usable, network_origin(usable));

  std::vector<CvPoint> matched;
  matched.reserve(cv.points.size());
  std::size_t unmatched = 0;
  for (const CvPoint& p : cv.points) {
    if (matcher.match(LatLon{p.latitude, p.longitude}))
      matched.push_back(p);
    else
      unmatched += 1;
  }

  const std::vector<WindowSample> samples = aggregate_vehicle_windows(matched, config.min_points);
  const AlignResult aligned = align_weather(samples, rwis.observations, schema);

  std::filesystem::create_directories(config.out_dir);
  atomic_write_file(config.out_dir + "/windows.csv", windows_csv(aligned.records, schema));
  atomic_write_file(config.out_dir + "/samples.csv", samples_csv(aligned.records));

  nlohmann::json summary;
  summary["cv"] = {{"kept", cv.points.size()},
                   {"dropped", cv.dropped},
                   {"drop_reasons", cv.drop_reasons}};
  summary["rwis"] = {{"kept", rwis.observations.size()},
                     {"dropped", rwis.dropped},
                     {"drop_reasons", rwis.drop_reasons},
                     {"unknown_rain_codes", rwis.unknown_rain_codes}};
  summary["network"] = {{"segments", network.size()}, {"excluded", network.size() - usable.size()}};
  summary["matching"] = {{"matched", matched.size()}, {"unmatched", unmatched}};
  summary["vehicle_windows"] = samples.size();
  summary["windows"] = aligned.records.size();
  summary["windows_dropped_no_rwis"] = aligned.windows_dropped_no_rwis;
  summary["duplicate_rwis"] = aligned.duplicate_rwis;
  atomic_write_file(config.out_dir + "/prepare_summary.json", summary.dump(2) + "\n");

  std::cout << "prepared " << aligned.records.size() << " windows from " << samples.size()
            << " vehicle-windows (" << matched.size() << "/" << cv.points.size()
            << " points matched, " << aligned.windows_dropped_no_rwis
            << " windows without weather)\n"
            << "out: " << config.out_dir << "\n";
}

void cmd_train(const RunConfig& config) {
  if (config.train_ranges.empty())
    throw std::runtime_error("config error: 'train_ranges' is empty");
  const FeatureSchema schema = load_schema(config);
  const std::vector<WindowRecord> records = load_records(config, schema);

  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  std::size_t train_windows = 0;
  for (const WindowRecord& rec : records) {
    if (!window_in_ranges(rec.window_index, config.train_ranges)) continue;
    train_windows += 1;
    for (const WindowSample& sample : rec.samples) {
      rows.push_back(rec.features);
      targets.push_back(sample.mean_speed_mph);
    }
  }
  if (rows.empty())
    throw std::runtime_error("validation error: no training samples in the configured ranges");

  const Forest forest = Forest::fit(rows, targets, config.forest, config.seed, config.threads);
  const std::string model_path = config.resolved_model_path();
  forest.save(model_path);
  std::cout << "trained " << forest.trees().size() << " trees on " << rows.size() << " samples ("
            << train_windows << " windows, " << forest.dimension() << " features)\n"
            << "model: " << model_path << "\n";
}

void cmd_recommend(const RunConfig& config) {
  const FeatureSchema schema = load_schema(config);
  const std::vector<WindowRecord> records = load_records(config, schema);
  const std::vector<WindowRecord> test = select_test(records, config);
  if (test.empty()) throw std::runtime_error("validation error: no test windows to recommend for");

  const Forest forest = Forest::load(config.resolved_model_path());
  if (forest.dimension() != schema.dimension())
    throw std::runtime_error("validation error: model expects " +
                             std::to_string(forest.dimension()) + " features, schema has " +
                             std::to_string(schema.dimension()));

  const std::string rwis_path = resolved(config.rwis_path, config.out_dir, "rwis.csv");
  const auto weather = weather_by_window(parse_rwis(rwis_path, config.rain_codes).observations);
  const std::vector<WindowOutput> outputs = forest_outputs(forest, test, weather, config);

  std::string out =
      "window_index,window_start,q25,q50,q75,v_phys,v_law,v_low,v_high,"
      "observed_q25,observed_q50,observed_q75,vehicle_count,binding\n";
  for (const WindowOutput& o : outputs) {
    const WindowRecord& rec = *o.record;
    out += std::to_string(rec.window_index) + ',' + format_iso8601_utc(rec.window_index * 600) +
           ',' + fmt6(o.q.q25) + ',' + fmt6(o.q.q50) + ',' + fmt6(o.q.q75) + ',' +
           fmt6(o.env.v_phys_mph) + ',' + fmt6(config.v_law_mph) + ',' + fmt6(o.interval.v_low) +
           ',' + fmt6(o.interval.v_high) + ',' + fmt6(rec.observed_q25) + ',' +
           fmt6(rec.observed_q50) + ',' + fmt6(rec.observed_q75) + ',' +
           std::to_string(rec.vehicle_count) + ',' +
           (o.env.binding == BindingConstraint::visibility ? "visibility" : "ssd_cap") + '\n';
  }
  atomic_write_file(config.out_dir + "/recommend.csv", out);
  std::cout << "recommended " << outputs.size() << " windows\n"
            << "out: " << config.out_dir << "/recommend.csv\n";
}

void cmd_evaluate(const RunConfig& config) {
  const FeatureSchema schema = load_schema(config);
  const std::vector<WindowRecord> records = load_records(config, schema);
  const std::vector<WindowRecord> test = select_test(records, config);
  if (test.empty()) throw std::runtime_error("validation error: no test windows to evaluate");

  const std::string rwis_path = resolved(config.rwis_path, config.out_dir, "rwis.csv");
  const auto weather = weather_by_window(parse_rwis(rwis_path, config.rain_codes).observations);

  std::map<std::int64_t, std::string> groups;
  for (const WindowRecord& rec : test) {
    const auto obs = weather.find(rec.window_index);
    std::string group = "unknown";
    if (obs != weather.end()) {
      const auto it = config.weather_groups.find(obs->second.rain_state);
      if (it != config.weather_groups.end()) group = it->second;
    }
    groups[rec.window_index] = group;
  }

  std::vector<MethodReport> methods;

  const std::string model_path = config.resolved_model_path();
  if (std::filesystem::exists(model_path)) {
    const Forest forest = Forest::load(model_path);
    if (forest.dimension() != schema.dimension())
      throw std::runtime_error("validation error: model expects " +
                               std::to_string(forest.dimension()) + " features, schema has " +
                               std::to_string(schema.dimension()));
    const std::vector<WindowOutput> outputs = forest_outputs(forest, test, weather, config);
    std::map<std::int64_t, WindowPrediction> predictions;
    for (const WindowOutput& o : outputs)
      predictions[o.record->window_index] =
          WindowPrediction{o.q.q50, Interval{o.interval.v_low, o.interval.v_high}};
    methods.push_back({"qrf", evaluate(test, predictions, groups, config.eval_deltas)});
  }

  {
    const PostedBand band = posted_band(config.v_law_mph, config.posted_pct);
    std::map<std::int64_t, WindowPrediction> predictions;
    for (const WindowRecord& rec : test)
      predictions[rec.window_index] = WindowPrediction{band.predictor, band.interval};
    methods.push_back({"posted", evaluate(test, predictions, groups, config.eval_deltas)});
  }

  for (int lookback : config.rolling_windows) {
    std::map<std::int64_t, WindowPrediction> predictions;
    for (const WindowRecord& rec : test) {
      const auto q = rolling_iqr(records, lookback, rec.window_index);
      if (!q) continue;
      predictions[rec.window_index] = WindowPrediction{q->q50, Interval{q->q25, q->q75}};
    }
    const std::string name = "rolling_iqr_" + std::to_string(lookback);
    if (predictions.empty()) {
      std::cout << "note: " << name << " has no window with history, skipped\n";
      continue;
    }
    methods.push_back({name, evaluate(test, predictions, groups, config.eval_deltas)});
  }

  std::filesystem::create_directories(config.out_dir);
  atomic_write_file(config.out_dir + "/eval_report.csv", eval_report_csv(methods));
  const std::string text = eval_report_text(methods);
  atomic_write_file(config.out_dir + "/eval_summary.txt", text);
  std::cout << text;
}

}  // namespace safespeed
