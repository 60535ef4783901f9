#include "safespeed/features.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace safespeed {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

const char* kDaysOfWeek[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

bool is_categorical_source(const std::string& source) {
  return source == "rain_state" || source == "window:day_of_week";
}

bool is_known_source(const std::string& source) {
  static const std::set<std::string> numeric = {
      "surface_temp_c", "grip",       "visibility_m", "precip_1h",  "precip_3h",
      "precip_6h",      "precip_12h", "precip_24h",   "window:hour", "window:vehicle_count"};
  if (numeric.count(source)) return true;
  if (is_categorical_source(source)) return true;
  return source.rfind("sensor:", 0) == 0;
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureDescriptor> features) : features_(std::move(features)) {
  validate();
}

void FeatureSchema::validate() const {
  if (features_.empty()) throw std::runtime_error("schema error: feature list is empty");
  std::set<std::string> names;
  for (const auto& f : features_) {
    if (!names.insert(f.name).second) {
      throw std::runtime_error("schema error: duplicate feature name: " + f.name);
    }
    if (!is_known_source(f.source)) {
      throw std::runtime_error("schema error: unknown feature source: " + f.source);
    }
    switch (f.encoding) {
      case Encoding::numeric:
        if (is_categorical_source(f.source)) {
          throw std::runtime_error("schema error: numeric encoding on categorical source: " + f.name);
        }
        break;
      case Encoding::one_hot:
        if (!is_categorical_source(f.source)) {
          throw std::runtime_error("schema error: one_hot encoding needs a categorical source: " + f.name);
        }
        if (f.categories.empty()) {
          throw std::runtime_error("schema error: one_hot feature has no categories: " + f.name);
        }
        break;
      case Encoding::cyclic:
        if (is_categorical_source(f.source)) {
          throw std::runtime_error("schema error: cyclic encoding on categorical source: " + f.name);
        }
        if (!(f.period > 0)) {
          throw std::runtime_error("schema error: cyclic feature needs period > 0: " + f.name);
        }
        break;
    }
  }
}

std::size_t FeatureSchema::dimension() const {
  std::size_t dim = 0;
  for (const auto& f : features_) {
    switch (f.encoding) {
      case Encoding::numeric: dim += 1; break;
      case Encoding::one_hot: dim += f.categories.size(); break;
      case Encoding::cyclic: dim += 2; break;
    }
    if (f.missing_flag) dim += 1;
  }
  return dim;
}

std::vector<std::string> FeatureSchema::column_names() const {
  std::vector<std::string> names;
  names.reserve(dimension());
  for (const auto& f : features_) {
    switch (f.encoding) {
      case Encoding::numeric:
        names.push_back(f.name);
        break;
      case Encoding::one_hot:
        for (const auto& c : f.categories) names.push_back(f.name + "=" + c);
        break;
      case Encoding::cyclic:
        names.push_back(f.name + "_sin");
        names.push_back(f.name + "_cos");
        break;
    }
    if (f.missing_flag) names.push_back(f.name + "_missing");
  }
  return names;
}

FeatureSchema FeatureSchema::default_schema() {
  std::vector<FeatureDescriptor> fs;
  auto numeric = [](std::string name, std::string source) {
    FeatureDescriptor f;
    f.name = std::move(name);
    f.source = std::move(source);
    f.encoding = Encoding::numeric;
    return f;
  };
  fs.push_back(numeric("surface_temp_c", "surface_temp_c"));
  fs.push_back(numeric("grip", "grip"));
  fs.push_back(numeric("visibility_m", "visibility_m"));

  FeatureDescriptor rain;
  rain.name = "rain_state";
  rain.source = "rain_state";
  rain.encoding = Encoding::one_hot;
  rain.categories = {"clear", "light_rain", "moderate_rain", "light_snow", "moderate_snow"};
  rain.missing_flag = true;
  fs.push_back(rain);

  fs.push_back(numeric("precip_1h", "precip_1h"));
  fs.push_back(numeric("precip_3h", "precip_3h"));
  fs.push_back(numeric("precip_6h", "precip_6h"));
  fs.push_back(numeric("precip_12h", "precip_12h"));
  fs.push_back(numeric("precip_24h", "precip_24h"));

  auto sensor = [](std::string name, std::string column) {
    FeatureDescriptor f;
    f.name = std::move(name);
    f.source = "sensor:" + column;
    f.encoding = Encoding::numeric;
    f.optional = true;
    f.default_value = 0.0;
    f.missing_flag = true;
    return f;
  };
  fs.push_back(sensor("wind_speed_ms", "WindSpeed"));
  fs.push_back(sensor("snow_layer_mm", "SnowLayer"));
  fs.push_back(sensor("ice_layer_mm", "IceLayer"));
  fs.push_back(sensor("water_layer_mm", "WaterLayer"));

  FeatureDescriptor hour;
  hour.name = "hour_of_day";
  hour.source = "window:hour";
  hour.encoding = Encoding::cyclic;
  hour.period = 24.0;
  fs.push_back(hour);

  FeatureDescriptor dow;
  dow.name = "day_of_week";
  dow.source = "window:day_of_week";
  dow.encoding = Encoding::one_hot;
  dow.categories.assign(kDaysOfWeek, kDaysOfWeek + 7);
  fs.push_back(dow);

  fs.push_back(numeric("vehicle_count", "window:vehicle_count"));
  return FeatureSchema(std::move(fs));
}

FeatureSchema FeatureSchema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("io error: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("schema error: " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.contains("features") || !doc["features"].is_array()) {
    throw std::runtime_error("schema error: feature schema needs a features array");
  }
  std::vector<FeatureDescriptor> fs;
  for (const auto& j : doc["features"]) {
    FeatureDescriptor f;
    if (!j.contains("name") || !j.contains("source") || !j.contains("encoding")) {
      throw std::runtime_error("schema error: feature entry needs name, source, encoding");
    }
    f.name = j["name"].get<std::string>();
    f.source = j["source"].get<std::string>();
    const std::string enc = j["encoding"].get<std::string>();
    if (enc == "numeric") {
      f.encoding = Encoding::numeric;
    } else if (enc == "one_hot") {
      f.encoding = Encoding::one_hot;
    } else if (enc == "cyclic") {
      f.encoding = Encoding::cyclic;
    } else {
      throw std::runtime_error("schema error: unknown encoding: " + enc);
    }
    if (j.contains("categories")) f.categories = j["categories"].get<std::vector<std::string>>();
    f.period = j.value("period", 24.0);
    f.optional = j.value("optional", false);
    f.default_value = j.value("default", 0.0);
    f.missing_flag = j.value("missing_flag", false);
    fs.push_back(std::move(f));
  }
  return FeatureSchema(std::move(fs));
}

std::string FeatureSchema::to_json() const {
  nlohmann::json doc;
  doc["features"] = nlohmann::json::array();
  for (const auto& f : features_) {
    nlohmann::json j;
    j["name"] = f.name;
    j["source"] = f.source;
    j["encoding"] = f.encoding == Encoding::numeric  ? "numeric"
                    : f.encoding == Encoding::one_hot ? "one_hot"
                                                      : "cyclic";
    if (f.encoding == Encoding::one_hot) j["categories"] = f.categories;
    if (f.encoding == Encoding::cyclic) j["period"] = f.period;
    if (f.optional) {
      j["optional"] = true;
      j["default"] = f.default_value;
    }
    if (f.missing_flag) j["missing_flag"] = true;
    doc["features"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

namespace {

struct RawValue {
  double number = 0;
  std::string category;
  bool missing = false;
};

RawValue fetch(const FeatureDescriptor& f, const RwisObservation& rwis, std::int64_t window_index,
               int vehicle_count) {
  RawValue v;
  const std::string& s = f.source;
  if (s == "surface_temp_c") v.number = rwis.surface_temp_c;
  else if (s == "grip") v.number = rwis.grip;
  else if (s == "visibility_m") v.number = rwis.visibility_m;
  else if (s == "precip_1h") v.number = rwis.precip_1h;
  else if (s == "precip_3h") v.number = rwis.precip_3h;
  else if (s == "precip_6h") v.number = rwis.precip_6h;
  else if (s == "precip_12h") v.number = rwis.precip_12h;
  else if (s == "precip_24h") v.number = rwis.precip_24h;
  else if (s == "rain_state") {
    v.category = rwis.rain_state;
    v.missing = rwis.rain_state == kRainUnknown;
  } else if (s == "window:hour") {
    const std::int64_t start = window_index * 600;
    const std::int64_t sec_of_day = ((start % 86400) + 86400) % 86400;
    v.number = static_cast<double>(sec_of_day) / 3600.0;
  } else if (s == "window:day_of_week") {
    std::int64_t day = window_index * 600 / 86400;
    if (window_index * 600 % 86400 < 0) day -= 1;  // floor for pre-epoch times
    v.category = kDaysOfWeek[((day + 3) % 7 + 7) % 7];  // epoch day 0 is a Thursday
  } else if (s == "window:vehicle_count") {
    v.number = static_cast<double>(vehicle_count);
  } else if (s.rfind("sensor:", 0) == 0) {
    const std::string key = s.substr(7);
    auto it = rwis.sensors.find(key);
    if (it != rwis.sensors.end()) {
      v.number = it->second;
    } else if (f.optional) {
      v.number = f.default_value;
      v.missing = true;
    } else {
      throw std::runtime_error("schema error: sensor column absent and no default: " + key);
    }
  } else {
    throw std::runtime_error("schema error: unknown feature source: " + s);
  }
  return v;
}

}  // namespace

std::vector<double> build_features(const RwisObservation& rwis, std::int64_t window_index,
                                   int vehicle_count, const FeatureSchema& schema) {
  std::vector<double> out;
  out.reserve(schema.dimension());
  for (const auto& f : schema.features()) {
    const RawValue v = fetch(f, rwis, window_index, vehicle_count);
    switch (f.encoding) {
      case Encoding::numeric:
        out.push_back(v.number);
        break;
      case Encoding::one_hot: {
        bool found = false;
        for (const auto& c : f.categories) {
          const bool hit = !v.missing && v.category == c;
          out.push_back(hit ? 1.0 : 0.0);
          found = found || hit;
        }
        (void)found;  // unlisted categories encode as all zeros
        break;
      }
      case Encoding::cyclic: {
        const double angle = kTwoPi * v.number / f.period;
        out.push_back(std::sin(angle));
        out.push_back(std::cos(angle));
        break;
      }
    }
    if (f.missing_flag) out.push_back(v.missing ? 1.0 : 0.0);
  }
  return out;
}

}  // namespace safespeed
