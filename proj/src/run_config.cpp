#include "safespeed/run_config.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"
#include "safespeed/csv.hpp"
#include "safespeed/json_util.hpp"
#include "safespeed/time_utils.hpp"

namespace safespeed {

namespace {

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

std::int64_t parse_instant(const nlohmann::json& v, const std::string& path) {
  const std::string text = jsonu::str(v, path);
  const auto epoch = parse_iso8601(text);
  if (!epoch)
    throw std::runtime_error("config error: '" + path + "' is not a valid timestamp: " + text);
  return *epoch;
}

std::vector<TimeRange> parse_ranges(const nlohmann::json& obj, const std::string& key,
                                    const std::string& path) {
  std::vector<TimeRange> ranges;
  if (!obj.contains(key)) return ranges;
  const auto& arr = obj.at(key);
  const std::string at = jsonu::join(path, key);
  if (!arr.is_array()) throw std::runtime_error("config error: '" + at + "' must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string entry_at = at + "[" + std::to_string(i) + "]";
    check_keys(arr[i], entry_at, {"start", "end"});
    TimeRange range;
    range.start_epoch = parse_instant(jsonu::require(arr[i], "start", entry_at), entry_at + ".start");
    range.end_epoch = parse_instant(jsonu::require(arr[i], "end", entry_at), entry_at + ".end");
    if (range.end_epoch <= range.start_epoch)
      throw std::runtime_error("config error: '" + entry_at + "' ends before it starts");
    ranges.push_back(range);
  }
  return ranges;
}

}  // namespace

bool window_in_ranges(std::int64_t window_index, const std::vector<TimeRange>& ranges) {
  const std::int64_t start = window_index * 600;
  for (const TimeRange& r : ranges)
    if (start >= r.start_epoch && start < r.end_epoch) return true;
  return false;
}

std::map<std::string, std::string> default_weather_groups() {
  return {{"clear", "clear"},          {"light_rain", "rain"}, {"moderate_rain", "rain"},
          {"light_snow", "snow"},      {"moderate_snow", "snow"},
          {kRainUnknown, "unknown"}};
}

PhysicsParams RunConfig::physics(double mu) const {
  PhysicsParams params;
  params.mu = mu;
  params.g_ft_s2 = gravity_ft_s2;
  params.t_reaction_s = t_reaction_s;
  params.k_gap_s = k_gap_s;
  params.ssd_cap_ft = ssd_cap_ft;
  return params;
}

std::string RunConfig::resolved_model_path() const {
  if (!model_path.empty()) return model_path;
  return out_dir + "/model.qrf";
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config error: not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw std::runtime_error("config error: document must be a JSON object");
  check_keys(doc, "",
             {"seed", "threads", "paths", "forest", "physics", "v_law_mph", "min_points",
              "train_ranges", "test_ranges", "baselines", "eval_deltas", "rain_codes",
              "weather_groups", "synth"});

  RunConfig config;
  config.seed = static_cast<std::uint64_t>(jsonu::int_or(doc, "seed", "", 1));
  config.threads = static_cast<int>(jsonu::int_or(doc, "threads", "", 1));
  if (config.threads < 1) throw std::runtime_error("config error: 'threads' must be at least 1");

  if (doc.contains("paths")) {
    const auto& paths = doc.at("paths");
    check_keys(paths, "paths", {"cv", "rwis", "network", "out_dir", "model", "feature_schema"});
    config.cv_path = jsonu::str_or(paths, "cv", "paths", "");
    config.rwis_path = jsonu::str_or(paths, "rwis", "paths", "");
    config.network_path = jsonu::str_or(paths, "network", "paths", "");
    config.out_dir = jsonu::str_or(paths, "out_dir", "paths", config.out_dir);
    config.model_path = jsonu::str_or(paths, "model", "paths", "");
    config.feature_schema_path = jsonu::str_or(paths, "feature_schema", "paths", "");
  }

  if (doc.contains("forest")) {
    const auto& forest = doc.at("forest");
    check_keys(forest, "forest",
               {"n_estimators", "min_samples_leaf", "max_depth", "mtry", "bootstrap"});
    config.forest.n_estimators = static_cast<int>(
        jsonu::int_or(forest, "n_estimators", "forest", config.forest.n_estimators));
    config.forest.min_samples_leaf = static_cast<int>(
        jsonu::int_or(forest, "min_samples_leaf", "forest", config.forest.min_samples_leaf));
    config.forest.max_depth =
        static_cast<int>(jsonu::int_or(forest, "max_depth", "forest", config.forest.max_depth));
    config.forest.mtry = static_cast<int>(jsonu::int_or(forest, "mtry", "forest", config.forest.mtry));
    config.forest.bootstrap = jsonu::bool_or(forest, "bootstrap", "forest", config.forest.bootstrap);
    if (config.forest.n_estimators < 1)
      throw std::runtime_error("config error: 'forest.n_estimators' must be at least 1");
    if (config.forest.min_samples_leaf < 1)
      throw std::runtime_error("config error: 'forest.min_samples_leaf' must be at least 1");
  }

  if (doc.contains("physics")) {
    const auto& physics = doc.at("physics");
    check_keys(physics, "physics", {"t_reaction_s", "k_gap_s", "ssd_cap_ft", "gravity_ft_s2"});
    config.t_reaction_s = jsonu::num_or(physics, "t_reaction_s", "physics", config.t_reaction_s);
    config.k_gap_s = jsonu::num_or(physics, "k_gap_s", "physics", config.k_gap_s);
    config.ssd_cap_ft = jsonu::num_or(physics, "ssd_cap_ft", "physics", config.ssd_cap_ft);
    config.gravity_ft_s2 = jsonu::num_or(physics, "gravity_ft_s2", "physics", config.gravity_ft_s2);
    if (config.t_reaction_s < 0)
      throw std::runtime_error("config error: 'physics.t_reaction_s' must be non-negative");
    if (config.k_gap_s < 0)
      throw std::runtime_error("config error: 'physics.k_gap_s' must be non-negative");
    if (!(config.ssd_cap_ft > 0))
      throw std::runtime_error("config error: 'physics.ssd_cap_ft' must be positive");
    if (!(config.gravity_ft_s2 > 0))
      throw std::runtime_error("config error: 'physics.gravity_ft_s2' must be positive");
  }

  config.v_law_mph = jsonu::num_or(doc, "v_law_mph", "", config.v_law_mph);
  if (!(config.v_law_mph > 0))
    throw std::runtime_error("config error: 'v_law_mph' must be positive");
  config.min_points = static_cast<int>(jsonu::int_or(doc, "min_points", "", config.min_points));
  if (config.min_points < 1)
    throw std::runtime_error("config error: 'min_points' must be at least 1");

  config.train_ranges = parse_ranges(doc, "train_ranges", "");
  config.test_ranges = parse_ranges(doc, "test_ranges", "");

  if (doc.contains("baselines")) {
    const auto& baselines = doc.at("baselines");
    check_keys(baselines, "baselines", {"posted_pct", "rolling_windows"});
    config.posted_pct = jsonu::num_or(baselines, "posted_pct", "baselines", config.posted_pct);
    if (config.posted_pct < 0 || config.posted_pct >= 1)
      throw std::runtime_error("config error: 'baselines.posted_pct' must lie in [0, 1)");
    if (baselines.contains("rolling_windows")) {
      const auto& rolling = baselines.at("rolling_windows");
      if (!rolling.is_array())
        throw std::runtime_error("config error: 'baselines.rolling_windows' must be an array");
      config.rolling_windows.clear();
      for (std::size_t i = 0; i < rolling.size(); ++i) {
        const auto n = static_cast<int>(
            jsonu::integer(rolling[i], "baselines.rolling_windows[" + std::to_string(i) + "]"));
        if (n < 1)
          throw std::runtime_error("config error: 'baselines.rolling_windows' entries must be >= 1");
        config.rolling_windows.push_back(n);
      }
    }
  }

  if (doc.contains("eval_deltas")) {
    const auto& deltas = doc.at("eval_deltas");
    if (!deltas.is_array())
      throw std::runtime_error("config error: 'eval_deltas' must be an array");
    config.eval_deltas.clear();
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const double d = jsonu::num(deltas[i], "eval_deltas[" + std::to_string(i) + "]");
      if (d < 0) throw std::runtime_error("config error: 'eval_deltas' entries must be >= 0");
      config.eval_deltas.push_back(d);
    }
  }

  if (doc.contains("rain_codes")) {
    const auto& codes = doc.at("rain_codes");
    if (!codes.is_object())
      throw std::runtime_error("config error: 'rain_codes' must map raw codes to canonical ones");
    for (const auto& entry : codes.items())
      config.rain_codes[entry.key()] = jsonu::str(entry.value(), "rain_codes." + entry.key());
  }

  if (doc.contains("weather_groups")) {
    const auto& groups = doc.at("weather_groups");
    if (!groups.is_object())
      throw std::runtime_error("config error: 'weather_groups' must map rain states to groups");
    for (const auto& entry : groups.items())
      config.weather_groups[entry.key()] = jsonu::str(entry.value(), "weather_groups." + entry.key());
  }

  if (doc.contains("synth")) {
    config.has_synth = true;
    config.synth = ScenarioConfig::from_json_text(doc.at("synth").dump(), "synth");
  }
  return config;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  return from_json_text(read_file(path));
}

}  // namespace safespeed
