#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "safespeed/pipeline.hpp"
#include "safespeed/qrf.hpp"
#include "safespeed/synth.hpp"
#include "safespeed/types.hpp"

namespace safespeed {

// Half-open wall-clock span; a window belongs to it when the window's start
// instant does.
struct TimeRange {
  std::int64_t start_epoch = 0;
  std::int64_t end_epoch = 0;
};

bool window_in_ranges(std::int64_t window_index, const std::vector<TimeRange>& ranges);

// canonical rain state -> reporting group (clear / rain / snow / unknown)
std::map<std::string, std::string> default_weather_groups();

struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 1;

  std::string cv_path;
  std::string rwis_path;
  std::string network_path;
  std::string out_dir = "out";
  std::string model_path;           // empty = <out_dir>/model.qrf
  std::string feature_schema_path;  // empty = built-in schema

  ForestParams forest;

  double t_reaction_s = 2.5;
  double k_gap_s = 0.0;
  double ssd_cap_ft = 495.0;
  double gravity_ft_s2 = 32.174;

  double v_law_mph = 55.0;
  int min_points = 1;

  std::vector<TimeRange> train_ranges;
  std::vector<TimeRange> test_ranges;  // empty = every window outside train_ranges

  double posted_pct = 0.10;
  std::vector<int> rolling_windows = {6, 12, 24};
  std::vector<double> eval_deltas = {5, 6};

  RainCodeTable rain_codes = default_rain_codes();
  std::map<std::string, std::string> weather_groups = default_weather_groups();

  bool has_synth = false;
  ScenarioConfig synth;

  PhysicsParams physics(double mu) const;
  std::string resolved_model_path() const;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_json_file(const std::string& path);
};

}  // namespace safespeed
