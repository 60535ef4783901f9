#include "safespeed/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "safespeed/csv.hpp"
#include "safespeed/time_utils.hpp"
#include "safespeed/units.hpp"

namespace safespeed {

namespace {

std::string trim_lower(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  std::string out = s.substr(b, e - b + 1);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<IgnitionStatus> parse_ignition(const std::string& raw) {
  std::string s = trim_lower(raw);
  for (auto& c : s) {
    if (c == ' ') c = '_';
  }
  if (s == "key_on") return IgnitionStatus::key_on;
  if (s == "mid_journey") return IgnitionStatus::mid_journey;
  if (s == "key_off") return IgnitionStatus::key_off;
  return std::nullopt;
}

void drop(CvParseResult& r, const std::string& reason) {
  r.dropped += 1;
  r.drop_reasons[reason] += 1;
}

void drop(RwisParseResult& r, const std::string& reason) {
  r.dropped += 1;
  r.drop_reasons[reason] += 1;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

RainCodeTable default_rain_codes() {
  return {
      {"clear", "clear"},       {"dry", "clear"},
      {"light rain", "light_rain"},   {"moderate rain", "moderate_rain"},
      {"light snow", "light_snow"},   {"moderate snow", "moderate_snow"},
      {"light_rain", "light_rain"},   {"moderate_rain", "moderate_rain"},
      {"light_snow", "light_snow"},   {"moderate_snow", "moderate_snow"},
  };
}

CvParseResult parse_cv(const std::string& path) {
  CsvReader reader(path);
  const auto cols = reader.require_columns({"dataPointId", "journeyId", "capturedTimestamp",
                                            "latitude", "longitude", "ignitionStatus", "speed"});
  CvParseResult result;
  result.points.reserve(reader.rows());
  for (std::size_t i = 0; i < reader.rows(); ++i) {
    const auto& row = reader.row(i);
    if (row.size() < reader.header().size()) {
      drop(result, "short_row");
      continue;
    }
    CvPoint p;
    p.data_point_id = row[cols[0]];
    p.journey_id = row[cols[1]];
    auto ts = parse_iso8601(row[cols[2]]);
    if (!ts) {
      drop(result, "bad_timestamp");
      continue;
    }
    p.captured_at = *ts;
    auto lat = parse_double(row[cols[3]]);
    auto lon = parse_double(row[cols[4]]);
    if (!lat || *lat < -90 || *lat > 90) {
      drop(result, "bad_latitude");
      continue;
    }
    if (!lon || *lon < -180 || *lon > 180) {
      drop(result, "bad_longitude");
      continue;
    }
    p.latitude = *lat;
    p.longitude = *lon;
    auto ign = parse_ignition(row[cols[5]]);
    if (!ign) {
      drop(result, "bad_ignition");
      continue;
    }
    p.ignition_status = *ign;
    auto speed = parse_double(row[cols[6]]);
    if (!speed || *speed < 0) {
      drop(result, "bad_speed");
      continue;
    }
    p.speed_kmh = *speed;
    result.points.push_back(std::move(p));
  }
  return result;
}

RwisParseResult parse_rwis(const std::string& path, const RainCodeTable& codes) {
  CsvReader reader(path);
  const auto cols = reader.require_columns({"Timestamp", "SurfaceTemp", "Grip", "RainState",
                                            "Visibility", "Precip1", "Precip3", "Precip6",
                                            "Precip12", "Precip24"});
  // Everything beyond the required set is an extended sensor column.
  std::vector<std::pair<std::string, int>> extended;
  for (std::size_t c = 0; c < reader.header().size(); ++c) {
    if (std::find(cols.begin(), cols.end(), static_cast<int>(c)) == cols.end()) {
      extended.emplace_back(reader.header()[c], static_cast<int>(c));
    }
  }

  RwisParseResult result;
  result.observations.reserve(reader.rows());
  for (std::size_t i = 0; i < reader.rows(); ++i) {
    const auto& row = reader.row(i);
    if (row.size() < reader.header().size()) {
      drop(result, "short_row");
      continue;
    }
    RwisObservation obs;
    auto ts = parse_iso8601(row[cols[0]]);
    if (!ts) {
      drop(result, "bad_timestamp");
      continue;
    }
    if (*ts % 600 != 0) {
      drop(result, "misaligned_timestamp");
      continue;
    }
    obs.observed_at = *ts;
    auto temp = parse_double(row[cols[1]]);
    if (!temp) {
      drop(result, "bad_surface_temp");
      continue;
    }
    obs.surface_temp_c = *temp;
    auto grip = parse_double(row[cols[2]]);
    if (!grip || *grip < 0 || *grip > 1) {
      drop(result, "bad_grip");
      continue;
    }
    obs.grip = *grip;
    auto it = codes.find(trim_lower(row[cols[3]]));
    if (it == codes.end()) {
      obs.rain_state = kRainUnknown;
      result.unknown_rain_codes += 1;
    } else {
      obs.rain_state = it->second;
    }
    auto vis = parse_double(row[cols[4]]);
    if (!vis || *vis < 0 || *vis > 2000) {
      drop(result, "bad_visibility");
      continue;
    }
    obs.visibility_m = *vis;
    double* precips[5] = {&obs.precip_1h, &obs.precip_3h, &obs.precip_6h, &obs.precip_12h,
                          &obs.precip_24h};
    bool ok = true;
    for (int k = 0; k < 5; ++k) {
      auto v = parse_double(row[cols[5 + k]]);
      if (!v || *v < 0) {
        ok = false;
        break;
      }
      *precips[k] = *v;
    }
    if (!ok) {
      drop(result, "bad_precip");
      continue;
    }
    for (const auto& [name, c] : extended) {
      if (row[c].empty()) continue;  // absent sensor reading
      auto v = parse_double(row[c]);
      if (v) obs.sensors[name] = *v;
    }
    result.observations.push_back(std::move(obs));
  }
  return result;
}

std::int64_t window_index(std::int64_t epoch_sec) {
  std::int64_t w = epoch_sec / 600;
  if (epoch_sec % 600 < 0) w -= 1;
  return w;
}

std::vector<WindowSample> aggregate_vehicle_windows(const std::vector<CvPoint>& matched_points,
                                                    int min_points) {
  std::map<std::pair<std::int64_t, std::string>, std::pair<double, int>> groups;
  for (const auto& p : matched_points) {
    auto& g = groups[{window_index(p.captured_at), p.journey_id}];
    g.first += kmh_to_mph(p.speed_kmh);
    g.second += 1;
  }
  std::vector<WindowSample> out;
  out.reserve(groups.size());
  for (const auto& [key, agg] : groups) {
    if (agg.second < min_points) continue;
    WindowSample s;
    s.window_index = key.first;
    s.journey_id = key.second;
    s.mean_speed_mph = agg.first / agg.second;
    s.n_points = agg.second;
    out.push_back(std::move(s));
  }
  return out;
}

double interpolated_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("interpolated_quantile: empty input");
  if (p < 0 || p > 1) throw std::invalid_argument("interpolated_quantile: p outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

Quantiles observed_quantiles(const std::vector<WindowSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("observed_quantiles: no samples");
  std::vector<double> speeds;
  speeds.reserve(samples.size());
  for (const auto& s : samples) speeds.push_back(s.mean_speed_mph);
  Quantiles q;
  q.q25 = interpolated_quantile(speeds, 0.25);
  q.q50 = interpolated_quantile(speeds, 0.50);
  q.q75 = interpolated_quantile(speeds, 0.75);
  return q;
}

AlignResult align_weather(const std::vector<WindowSample>& samples,
                          const std::vector<RwisObservation>& rwis, const FeatureSchema& schema) {
  std::map<std::int64_t, const RwisObservation*> by_window;
  AlignResult result;
  for (const auto& obs : rwis) {
    auto [it, inserted] = by_window.emplace(window_index(obs.observed_at), &obs);
    if (!inserted) result.duplicate_rwis += 1;  // keep the first observation
  }
  std::map<std::int64_t, std::vector<WindowSample>> by_index;
  for (const auto& s : samples) by_index[s.window_index].push_back(s);

  for (auto& [wi, group] : by_index) {
    auto it = by_window.find(wi);
    if (it == by_window.end()) {
      result.windows_dropped_no_rwis += 1;
      continue;
    }
    std::sort(group.begin(), group.end(),
              [](const WindowSample& a, const WindowSample& b) { return a.journey_id < b.journey_id; });
    WindowRecord rec;
    rec.window_index = wi;
    rec.vehicle_count = static_cast<int>(group.size());
    rec.features = build_features(*it->second, wi, rec.vehicle_count, schema);
    const Quantiles q = observed_quantiles(group);
    rec.observed_q25 = q.q25;
    rec.observed_q50 = q.q50;
    rec.observed_q75 = q.q75;
    rec.samples = std::move(group);
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::string windows_csv(const std::vector<WindowRecord>& records, const FeatureSchema& schema) {
  std::ostringstream out;
  out << "window_index,window_start";
  for (const auto& name : schema.column_names()) out << ',' << name;
  out << ",observed_q25,observed_q50,observed_q75,vehicle_count\n";
  for (const auto& r : records) {
    out << r.window_index << ',' << format_iso8601_utc(r.window_index * 600);
    for (double f : r.features) out << ',' << fmt6(f);
    out << ',' << fmt6(r.observed_q25) << ',' << fmt6(r.observed_q50) << ',' << fmt6(r.observed_q75)
        << ',' << r.vehicle_count << '\n';
  }
  return out.str();
}

std::string samples_csv(const std::vector<WindowRecord>& records) {
  std::ostringstream out;
  out << "window_index,journey_id,mean_speed_mph,n_points\n";
  for (const auto& r : records) {
    for (const auto& s : r.samples) {
      out << s.window_index << ',' << s.journey_id << ',' << fmt6(s.mean_speed_mph) << ','
          << s.n_points << '\n';
    }
  }
  return out.str();
}

std::vector<WindowRecord> load_window_records(const std::string& windows_path,
                                              const std::string& samples_path,
                                              const FeatureSchema& schema) {
  CsvReader win(windows_path);
  const auto names = schema.column_names();
  std::vector<std::string> expect = {"window_index", "window_start"};
  expect.insert(expect.end(), names.begin(), names.end());
  expect.insert(expect.end(), {"observed_q25", "observed_q50", "observed_q75", "vehicle_count"});
  if (win.header() != expect) {
    throw std::runtime_error("schema error: " + windows_path +
                             " columns do not match the feature schema");
  }
  std::vector<WindowRecord> records;
  std::map<std::int64_t, std::size_t> index_of;
  for (std::size_t i = 0; i < win.rows(); ++i) {
    const auto& row = win.row(i);
    if (row.size() != expect.size()) {
      throw std::runtime_error("schema error: bad row width in " + windows_path);
    }
    WindowRecord r;
    r.window_index = std::stoll(row[0]);
    r.features.reserve(names.size());
    for (std::size_t f = 0; f < names.size(); ++f) {
      auto v = parse_double(row[2 + f]);
      if (!v) throw std::runtime_error("schema error: bad feature value in " + windows_path);
      r.features.push_back(*v);
    }
    const std::size_t base = 2 + names.size();
    r.observed_q25 = std::stod(row[base]);
    r.observed_q50 = std::stod(row[base + 1]);
    r.observed_q75 = std::stod(row[base + 2]);
    r.vehicle_count = std::stoi(row[base + 3]);
    index_of[r.window_index] = records.size();
    records.push_back(std::move(r));
  }

  CsvReader smp(samples_path);
  const auto scols = smp.require_columns({"window_index", "journey_id", "mean_speed_mph", "n_points"});
  for (std::size_t i = 0; i < smp.rows(); ++i) {
    const auto& row = smp.row(i);
    WindowSample s;
    s.window_index = std::stoll(row[scols[0]]);
    s.journey_id = row[scols[1]];
    s.mean_speed_mph = std::stod(row[scols[2]]);
    s.n_points = std::stoi(row[scols[3]]);
    auto it = index_of.find(s.window_index);
    if (it == index_of.end()) {
      throw std::runtime_error("schema error: sample references unknown window " +
                               std::to_string(s.window_index));
    }
    records[it->second].samples.push_back(std::move(s));
  }
  for (const auto& r : records) {
    if (static_cast<int>(r.samples.size()) != r.vehicle_count) {
      throw std::runtime_error("schema error: window " + std::to_string(r.window_index) +
                               " vehicle_count does not match its samples");
    }
  }
  return records;
}

}  // namespace safespeed
