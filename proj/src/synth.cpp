#include "safespeed/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <stdexcept>

#include "json.hpp"
#include "safespeed/csv.hpp"
#include "safespeed/json_util.hpp"
#include "safespeed/rng.hpp"
#include "safespeed/time_utils.hpp"
#include "safespeed/units.hpp"

namespace safespeed {

namespace {

constexpr double kZ75 = 0.6744897501960817;  // standard normal 75th percentile
constexpr double kOriginLat = 42.9;
constexpr double kOriginLon = -78.8;
constexpr double kMPerDegLat = 110540.0;
constexpr double kMPerDegLon = 111320.0;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void check_keys(const nlohmann::json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) return;
  for (const auto& entry : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return entry.key() == k;
        }) == allowed.end())
      throw std::runtime_error("config error: unknown key '" + jsonu::join(path, entry.key()) + "'");
  }
}

void read_range(const nlohmann::json& obj, const std::string& key, const std::string& path,
                double& lo, double& hi) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  const std::string full = jsonu::join(path, key);
  if (!v.is_array() || v.size() != 2)
    throw std::runtime_error("config error: '" + full + "' must be a [lo, hi] pair");
  lo = jsonu::num(v[0], full + "[0]");
  hi = jsonu::num(v[1], full + "[1]");
  if (hi < lo) throw std::runtime_error("config error: '" + full + "' has hi below lo");
}

RegimeParams parse_regime(const nlohmann::json& obj, const std::string& path, RegimeParams base) {
  check_keys(obj, path,
             {"shift_mph", "sigma_mph", "grip", "visibility_m", "surface_temp_c", "precip_rate",
              "wind", "snow_layer", "ice_layer", "water_layer", "rain_code"});
  base.shift_mph = jsonu::num_or(obj, "shift_mph", path, base.shift_mph);
  base.sigma_mph = jsonu::num_or(obj, "sigma_mph", path, base.sigma_mph);
  read_range(obj, "grip", path, base.grip_lo, base.grip_hi);
  read_range(obj, "visibility_m", path, base.visibility_lo, base.visibility_hi);
  read_range(obj, "surface_temp_c", path, base.temp_lo, base.temp_hi);
  base.precip_rate = jsonu::num_or(obj, "precip_rate", path, base.precip_rate);
  read_range(obj, "wind", path, base.wind_lo, base.wind_hi);
  read_range(obj, "snow_layer", path, base.snow_lo, base.snow_hi);
  read_range(obj, "ice_layer", path, base.ice_lo, base.ice_hi);
  read_range(obj, "water_layer", path, base.water_lo, base.water_hi);
  base.rain_code = jsonu::str_or(obj, "rain_code", path, base.rain_code);
  return base;
}

void validate_regime(const std::string& name, const RegimeParams& r) {
  const std::string at = "synth regime '" + name + "'";
  if (!(r.sigma_mph > 0)) throw std::runtime_error("config error: " + at + ": sigma must be positive");
  if (r.grip_lo < 0 || r.grip_hi > 1)
    throw std::runtime_error("config error: " + at + ": grip must stay within [0, 1]");
  if (r.visibility_lo < 0 || r.visibility_hi > 2000)
    throw std::runtime_error("config error: " + at + ": visibility must stay within [0, 2000] m");
  if (r.precip_rate < 0) throw std::runtime_error("config error: " + at + ": precip rate must be non-negative");
}

double trailing_mean(const std::deque<double>& draws, std::size_t k) {
  const std::size_t n = std::min(draws.size(), k);
  if (n == 0) return 0;
  double total = 0;
  for (std::size_t i = draws.size() - n; i < draws.size(); ++i) total += draws[i];
  return total / static_cast<double>(n);
}

struct Frame {
  double ft_per_deg_lat = kMPerDegLat * kMToFt;
  double ft_per_deg_lon = kMPerDegLon * kMToFt;  // scaled by cos(origin lat)

  Frame() { ft_per_deg_lon *= std::cos(kOriginLat * 3.14159265358979323846 / 180.0); }

  double lat_of(double y_ft) const { return kOriginLat + y_ft / ft_per_deg_lat; }
  double lon_of(double x_ft) const { return kOriginLon + x_ft / ft_per_deg_lon; }
};

}  // namespace

std::map<std::string, RegimeParams> default_regimes() {
  std::map<std::string, RegimeParams> regimes;
  RegimeParams clear;
  regimes["clear"] = clear;

  RegimeParams rain;
  rain.shift_mph = 7;
  rain.sigma_mph = 3.5;
  rain.grip_lo = 0.55;
  rain.grip_hi = 0.70;
  rain.visibility_lo = 500;
  rain.visibility_hi = 900;
  rain.temp_lo = 2;
  rain.temp_hi = 10;
  rain.precip_rate = 1.2;
  rain.wind_lo = 5;
  rain.wind_hi = 18;
  rain.water_lo = 0.2;
  rain.water_hi = 0.8;
  rain.rain_code = "Light Rain";
  regimes["rain"] = rain;

  RegimeParams snow;
  snow.shift_mph = 16;
  snow.sigma_mph = 4.0;
  snow.grip_lo = 0.30;
  snow.grip_hi = 0.45;
  snow.visibility_lo = 150;
  snow.visibility_hi = 400;
  snow.temp_lo = -8;
  snow.temp_hi = -1;
  snow.precip_rate = 2.0;
  snow.wind_lo = 8;
  snow.wind_hi = 25;
  snow.snow_lo = 0.5;
  snow.snow_hi = 2.0;
  snow.ice_lo = 0;
  snow.ice_hi = 0.5;
  snow.rain_code = "Moderate Snow";
  regimes["snow"] = snow;
  return regimes;
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& json_text,
                                              const std::string& path_prefix) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config error: scenario is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object())
    throw std::runtime_error("config error: scenario must be a JSON object");
  const std::string& at = path_prefix;
  check_keys(doc, at,
             {"seed", "start_time", "n_days", "vehicles_per_window", "points_per_vehicle",
              "network", "decoy_fraction", "cv_utc_offset_minutes", "sensor_missing_rate",
              "rwis_gap_rate", "base_speed_mph", "regimes", "script"});

  ScenarioConfig config;
  config.regimes = default_regimes();
  config.seed = static_cast<std::uint64_t>(jsonu::int_or(doc, "seed", at, 1));
  config.start_time = jsonu::str_or(doc, "start_time", at, config.start_time);
  config.n_days = static_cast<int>(jsonu::int_or(doc, "n_days", at, config.n_days));
  config.vehicles_per_window =
      jsonu::num_or(doc, "vehicles_per_window", at, config.vehicles_per_window);
  if (doc.contains("points_per_vehicle")) {
    double lo = config.points_per_vehicle_min;
    double hi = config.points_per_vehicle_max;
    read_range(doc, "points_per_vehicle", at, lo, hi);
    config.points_per_vehicle_min = static_cast<int>(lo);
    config.points_per_vehicle_max = static_cast<int>(hi);
  }
  if (doc.contains("network")) {
    const auto& net = doc.at("network");
    const std::string net_at = jsonu::join(at, "network");
    check_keys(net, net_at, {"segments", "lanes", "segment_length_ft", "include_ramp"});
    config.network.segments =
        static_cast<int>(jsonu::int_or(net, "segments", net_at, config.network.segments));
    config.network.lanes = static_cast<int>(jsonu::int_or(net, "lanes", net_at, config.network.lanes));
    config.network.segment_length_ft =
        jsonu::num_or(net, "segment_length_ft", net_at, config.network.segment_length_ft);
    config.network.include_ramp =
        jsonu::bool_or(net, "include_ramp", net_at, config.network.include_ramp);
  }
  config.decoy_fraction = jsonu::num_or(doc, "decoy_fraction", at, config.decoy_fraction);
  config.cv_utc_offset_minutes = static_cast<int>(
      jsonu::int_or(doc, "cv_utc_offset_minutes", at, config.cv_utc_offset_minutes));
  config.sensor_missing_rate =
      jsonu::num_or(doc, "sensor_missing_rate", at, config.sensor_missing_rate);
  config.rwis_gap_rate = jsonu::num_or(doc, "rwis_gap_rate", at, config.rwis_gap_rate);
  config.base_speed_mph = jsonu::num_or(doc, "base_speed_mph", at, config.base_speed_mph);

  if (doc.contains("regimes")) {
    const auto& regs = doc.at("regimes");
    const std::string regs_at = jsonu::join(at, "regimes");
    if (!regs.is_object()) throw std::runtime_error("config error: '" + regs_at + "' must be an object");
    for (const auto& entry : regs.items()) {
      const std::string reg_at = jsonu::join(regs_at, entry.key());
      const auto base = config.regimes.find(entry.key());
      config.regimes[entry.key()] = parse_regime(
          entry.value(), reg_at,
          base == config.regimes.end() ? RegimeParams{} : base->second);
    }
  }
  if (doc.contains("script")) {
    const auto& script = doc.at("script");
    const std::string script_at = jsonu::join(at, "script");
    if (!script.is_array()) throw std::runtime_error("config error: '" + script_at + "' must be an array");
    for (std::size_t i = 0; i < script.size(); ++i) {
      const std::string entry_at = script_at + "[" + std::to_string(i) + "]";
      check_keys(script[i], entry_at, {"regime", "windows"});
      ScriptEntry entry;
      entry.regime = jsonu::str(jsonu::require(script[i], "regime", entry_at), entry_at + ".regime");
      entry.n_windows = static_cast<int>(
          jsonu::integer(jsonu::require(script[i], "windows", entry_at), entry_at + ".windows"));
      if (entry.n_windows < 1)
        throw std::runtime_error("config error: '" + entry_at + ".windows' must be at least 1");
      config.script.push_back(std::move(entry));
    }
  }
  return config;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
  return from_json_text(read_file(path));
}

namespace {

void validate_config(const ScenarioConfig& config, std::int64_t start_epoch) {
  if (start_epoch % 600 != 0)
    throw std::runtime_error("config error: start_time must land on a 10-minute boundary");
  if (config.n_days < 1) throw std::runtime_error("config error: n_days must be at least 1");
  if (config.vehicles_per_window < 0 || config.vehicles_per_window > 1000)
    throw std::runtime_error("config error: vehicles_per_window must lie in [0, 1000]");
  if (config.points_per_vehicle_min < 1 ||
      config.points_per_vehicle_max < config.points_per_vehicle_min)
    throw std::runtime_error("config error: points_per_vehicle must satisfy 1 <= min <= max");
  if (config.network.segments < 1) throw std::runtime_error("config error: network needs segments");
  if (config.network.lanes < 1) throw std::runtime_error("config error: network needs lanes");
  if (!(config.network.segment_length_ft > 0))
    throw std::runtime_error("config error: segment length must be positive");
  if (config.decoy_fraction < 0 || config.decoy_fraction > 1)
    throw std::runtime_error("config error: decoy_fraction must lie in [0, 1]");
  if (config.sensor_missing_rate < 0 || config.sensor_missing_rate > 1)
    throw std::runtime_error("config error: sensor_missing_rate must lie in [0, 1]");
  if (config.rwis_gap_rate < 0 || config.rwis_gap_rate > 1)
    throw std::runtime_error("config error: rwis_gap_rate must lie in [0, 1]");
  if (!(config.base_speed_mph > 0))
    throw std::runtime_error("config error: base_speed_mph must be positive");
  for (const auto& entry : config.regimes) validate_regime(entry.first, entry.second);
  for (const auto& entry : config.script)
    if (!config.regimes.count(entry.regime))
      throw std::runtime_error("config error: script references unknown regime '" + entry.regime +
                               "'");
  if (config.script.empty() && !config.regimes.count("clear"))
    throw std::runtime_error("config error: empty script needs a 'clear' regime");
}

std::string network_geojson(const ScenarioConfig& config, const Frame& frame) {
  nlohmann::json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = nlohmann::json::array();
  const double len = config.network.segment_length_ft;
  for (int s = 0; s < config.network.segments; ++s) {
    nlohmann::json feat;
    feat["type"] = "Feature";
    feat["properties"] = {{"osmid", "way/" + std::to_string(1001 + s)},
                          {"lanes", config.network.lanes},
                          {"highway", "motorway"},
                          {"maxspeed", "55 mph"},
                          {"name", "mainline " + std::to_string(s + 1)}};
    feat["geometry"] = {
        {"type", "LineString"},
        {"coordinates",
         {{frame.lon_of(s * len), frame.lat_of(0)}, {frame.lon_of((s + 1) * len), frame.lat_of(0)}}}};
    doc["features"].push_back(std::move(feat));
  }
  if (config.network.include_ramp) {
    const double end_x = config.network.segments * len;
    nlohmann::json feat;
    feat["type"] = "Feature";
    feat["properties"] = {{"osmid", "way/9901"},
                          {"lanes", 1},
                          {"highway", "motorway_link"},
                          {"maxspeed", "55 mph"},
                          {"name", "exit ramp"}};
    feat["geometry"] = {{"type", "LineString"},
                        {"coordinates",
                         {{frame.lon_of(end_x), frame.lat_of(0)},
                          {frame.lon_of(end_x + 400), frame.lat_of(250)}}}};
    doc["features"].push_back(std::move(feat));
  }
  return doc.dump(2) + "\n";
}

}  // namespace

SynthSummary generate_scenario(const ScenarioConfig& config, const std::string& out_dir) {
  const auto start = parse_iso8601(config.start_time);
  if (!start) throw std::runtime_error("config error: start_time is not a valid timestamp");
  validate_config(config, *start);
  std::filesystem::create_directories(out_dir);

  const Frame frame;
  const std::int64_t total_windows = static_cast<std::int64_t>(config.n_days) * 144;
  const std::int64_t first_window = *start / 600;

  // Regime of each window, from the cycled script.
  std::vector<const RegimeParams*> schedule;
  std::vector<std::string> schedule_names;
  schedule.reserve(static_cast<std::size_t>(total_windows));
  if (config.script.empty()) {
    for (std::int64_t w = 0; w < total_windows; ++w) {
      schedule.push_back(&config.regimes.at("clear"));
      schedule_names.push_back("clear");
    }
  } else {
    std::size_t entry = 0;
    int used = 0;
    for (std::int64_t w = 0; w < total_windows; ++w) {
      if (used == config.script[entry].n_windows) {
        entry = (entry + 1) % config.script.size();
        used = 0;
      }
      schedule.push_back(&config.regimes.at(config.script[entry].regime));
      schedule_names.push_back(config.script[entry].regime);
      ++used;
    }
  }

  Rng rng(config.seed);
  const double radius_ft = config.network.lanes * 12.0 / 2.0;
  const double lane_half = std::max(0.0, radius_ft - 2.0);
  const double seg_len = config.network.segment_length_ft;

  std::string cv = "dataPointId,journeyId,capturedTimestamp,latitude,longitude,ignitionStatus,speed\n";
  std::string rwis =
      "Timestamp,SurfaceTemp,Grip,RainState,Visibility,Precip1,Precip3,Precip6,Precip12,Precip24,"
      "WindSpeed,SnowLayer,IceLayer,WaterLayer\n";
  std::string truth = "window_index,regime,true_q25,true_q50,true_q75\n";
  std::string labels = "data_point_id,journey_id,is_decoy,segment_osmid\n";

  SynthSummary summary;
  summary.first_window = first_window;
  summary.n_windows = total_windows;

  std::deque<double> precip_draws;
  std::size_t point_counter = 0;
  std::size_t vehicle_counter = 0;
  std::size_t decoy_counter = 0;

  for (std::int64_t w = 0; w < total_windows; ++w) {
    const RegimeParams& regime = *schedule[static_cast<std::size_t>(w)];
    const std::int64_t window_start = *start + w * 600;

    // Weather row. Draws happen unconditionally so the vehicle stream is
    // unaffected by whether this row lands in a gap.
    const bool gap = rng.uniform() < config.rwis_gap_rate;
    const double temp = rng.uniform(regime.temp_lo, regime.temp_hi);
    const double grip = rng.uniform(regime.grip_lo, regime.grip_hi);
    const double visibility = rng.uniform(regime.visibility_lo, regime.visibility_hi);
    const double precip = regime.precip_rate * rng.uniform(0.5, 1.5);
    precip_draws.push_back(precip);
    if (precip_draws.size() > 144) precip_draws.pop_front();
    const double wind = rng.uniform(regime.wind_lo, regime.wind_hi);
    const double snow_layer = rng.uniform(regime.snow_lo, regime.snow_hi);
    const double ice_layer = rng.uniform(regime.ice_lo, regime.ice_hi);
    const double water_layer = rng.uniform(regime.water_lo, regime.water_hi);
    bool missing[4];
    for (bool& m : missing) m = rng.uniform() < config.sensor_missing_rate;
    if (!gap) {
      rwis += format_iso8601_utc(window_start) + ',' + fmt("%.1f", temp) + ',' +
              fmt("%.3f", grip) + ',' + regime.rain_code + ',' + fmt("%.1f", visibility) + ',' +
              fmt("%.3f", trailing_mean(precip_draws, 6)) + ',' +
              fmt("%.3f", trailing_mean(precip_draws, 18)) + ',' +
              fmt("%.3f", trailing_mean(precip_draws, 36)) + ',' +
              fmt("%.3f", trailing_mean(precip_draws, 72)) + ',' +
              fmt("%.3f", trailing_mean(precip_draws, 144)) + ',' +
              (missing[0] ? "" : fmt("%.3f", wind)) + ',' +
              (missing[1] ? "" : fmt("%.3f", snow_layer)) + ',' +
              (missing[2] ? "" : fmt("%.3f", ice_layer)) + ',' +
              (missing[3] ? "" : fmt("%.3f", water_layer)) + '\n';
      summary.n_rwis_rows += 1;
    }

    const double q50 = config.base_speed_mph - regime.shift_mph;
    truth += std::to_string(first_window + w) + ',' + schedule_names[static_cast<std::size_t>(w)] +
             ',' + fmt("%.12f", q50 - kZ75 * regime.sigma_mph) + ',' + fmt("%.12f", q50) + ',' +
             fmt("%.12f", q50 + kZ75 * regime.sigma_mph) + '\n';

    const int n_vehicles = rng.poisson(config.vehicles_per_window);
    for (int v = 0; v < n_vehicles; ++v) {
      const bool decoy = rng.uniform() < config.decoy_fraction;
      const double speed_mph =
          std::max(1.0, q50 + regime.sigma_mph * rng.normal());
      const int span = config.points_per_vehicle_max - config.points_per_vehicle_min + 1;
      const int n_points =
          config.points_per_vehicle_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
      const auto segment = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.network.segments)));
      const double along = 0.05 + 0.9 * rng.uniform();
      const double lateral = decoy ? radius_ft + 10.0 + 70.0 * rng.uniform()
                                   : (2.0 * rng.uniform() - 1.0) * lane_half;

      std::vector<std::int64_t> offsets;
      offsets.reserve(static_cast<std::size_t>(n_points));
      for (int i = 0; i < n_points; ++i)
        offsets.push_back(static_cast<std::int64_t>(rng.below(600)));
      std::sort(offsets.begin(), offsets.end());
      std::vector<double> jitters;
      jitters.reserve(static_cast<std::size_t>(n_points));
      for (int i = 0; i < n_points; ++i) jitters.push_back((rng.uniform() - 0.5) * 0.02);

      char jid[16];
      if (decoy) {
        decoy_counter += 1;
        summary.n_decoys += 1;
        std::snprintf(jid, sizeof(jid), "D%05zu", decoy_counter);
      } else {
        vehicle_counter += 1;
        std::snprintf(jid, sizeof(jid), "J%05zu", vehicle_counter);
      }
      const std::string journey_id(jid);
      summary.n_vehicle_windows += 1;

      const double speed_kmh = mph_to_kmh(speed_mph);
      const std::string segment_id = decoy ? "" : "way/" + std::to_string(1001 + segment);
      for (int i = 0; i < n_points; ++i) {
        point_counter += 1;
        char pid[16];
        std::snprintf(pid, sizeof(pid), "P%07zu", point_counter);
        const double u = std::clamp(along + jitters[static_cast<std::size_t>(i)], 0.05, 0.95);
        const double x_ft = (segment + u) * seg_len;
        const char* ignition = i == 0 ? "key_on" : (i == n_points - 1 ? "key_off" : "mid_journey");
        if (n_points == 1) ignition = "mid_journey";
        cv += std::string(pid) + ',' + journey_id + ',' +
              format_iso8601_offset(window_start + offsets[static_cast<std::size_t>(i)],
                                    config.cv_utc_offset_minutes) +
              ',' + fmt("%.8f", frame.lat_of(lateral)) + ',' + fmt("%.8f", frame.lon_of(x_ft)) +
              ',' + ignition + ',' + fmt("%.6f", speed_kmh) + '\n';
        labels += std::string(pid) + ',' + journey_id + ',' + (decoy ? "1" : "0") + ',' +
                  segment_id + '\n';
        summary.n_cv_rows += 1;
      }
    }
  }

  nlohmann::json manifest;
  manifest["seed"] = config.seed;
  manifest["start_time"] = config.start_time;
  manifest["start_epoch"] = *start;
  manifest["first_window"] = summary.first_window;
  manifest["n_windows"] = summary.n_windows;
  manifest["n_cv_rows"] = summary.n_cv_rows;
  manifest["n_rwis_rows"] = summary.n_rwis_rows;
  manifest["n_vehicle_windows"] = summary.n_vehicle_windows;
  manifest["n_decoys"] = summary.n_decoys;
  manifest["base_speed_mph"] = config.base_speed_mph;
  manifest["files"] = {{"cv", "cv.csv"},
                       {"rwis", "rwis.csv"},
                       {"network", "network.geojson"},
                       {"truth", "truth.csv"},
                       {"labels", "labels.csv"}};

  const std::filesystem::path dir(out_dir);
  atomic_write_file((dir / "cv.csv").string(), cv);
  atomic_write_file((dir / "rwis.csv").string(), rwis);
  atomic_write_file((dir / "network.geojson").string(), network_geojson(config, frame));
  atomic_write_file((dir / "truth.csv").string(), truth);
  atomic_write_file((dir / "labels.csv").string(), labels);
  atomic_write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  return summary;
}

}  // namespace safespeed
