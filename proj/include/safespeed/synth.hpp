#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace safespeed {

// One weather regime. Speeds are base_speed - shift plus Gaussian noise, so
// the true conditional quantiles of every window are known in closed form.
struct RegimeParams {
  double shift_mph = 0;
  double sigma_mph = 3.0;
  double grip_lo = 0.78, grip_hi = 0.92;
  double visibility_lo = 1200, visibility_hi = 2000;  // meters, parser caps at 2000
  double temp_lo = 5, temp_hi = 15;
  double precip_rate = 0;  // per-window precipitation scale, arbitrary mm
  double wind_lo = 0, wind_hi = 12;
  double snow_lo = 0, snow_hi = 0;
  double ice_lo = 0, ice_hi = 0;
  double water_lo = 0, water_hi = 0;
  std::string rain_code = "Dry";  // raw RainState written to the weather file
};

struct ScriptEntry {
  std::string regime;
  int n_windows = 0;
};

struct SynthNetwork {
  int segments = 6;
  int lanes = 2;
  double segment_length_ft = 1500;
  bool include_ramp = true;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::string start_time = "2023-01-09T00:00:00Z";  // must land on a 10-minute boundary
  int n_days = 1;
  double vehicles_per_window = 6.0;  // Poisson mean
  int points_per_vehicle_min = 4;
  int points_per_vehicle_max = 10;
  SynthNetwork network;
  double decoy_fraction = 0;         // vehicles placed outside every buffer
  int cv_utc_offset_minutes = -240;  // vehicle timestamps carry this zone
  double sensor_missing_rate = 0;    // chance an extended sensor cell is blank
  double rwis_gap_rate = 0;          // chance a weather row is never emitted
  double base_speed_mph = 63;
  std::map<std::string, RegimeParams> regimes;
  std::vector<ScriptEntry> script;  // cycled over the run; empty = clear throughout

  static ScenarioConfig from_json_text(const std::string& json_text,
                                       const std::string& path_prefix = "");
  static ScenarioConfig from_json_file(const std::string& path);
};

// clear / rain / snow with progressively lower speed, grip and visibility.
std::map<std::string, RegimeParams> default_regimes();

struct SynthSummary {
  std::int64_t first_window = 0;
  std::int64_t n_windows = 0;
  std::size_t n_cv_rows = 0;
  std::size_t n_rwis_rows = 0;
  std::size_t n_vehicle_windows = 0;
  std::size_t n_decoys = 0;
};

// Writes cv.csv, rwis.csv, network.geojson, truth.csv, labels.csv and
// manifest.json into out_dir. Byte-identical for identical configs.
SynthSummary generate_scenario(const ScenarioConfig& config, const std::string& out_dir);

}  // namespace safespeed
