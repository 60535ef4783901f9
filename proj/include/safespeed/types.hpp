#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace safespeed {

enum class IgnitionStatus { key_on, mid_journey, key_off };

// One timestamped GPS observation of one vehicle journey.
struct CvPoint {
  std::string data_point_id;
  std::string journey_id;
  std::int64_t captured_at = 0;  // epoch seconds, UTC
  double latitude = 0;           // degrees
  double longitude = 0;          // degrees
  IgnitionStatus ignition_status = IgnitionStatus::mid_journey;
  double speed_kmh = 0;
};

// Canonical rain-state categories. Raw station codes are mapped through a
// configurable code table at parse time; unmapped codes become kRainUnknown.
inline constexpr const char* kRainUnknown = "unknown";

// One 10-minute road-weather record.
struct RwisObservation {
  std::int64_t observed_at = 0;  // epoch seconds, UTC, on a 10-minute boundary
  double surface_temp_c = 0;
  double grip = 0;               // [0, 1]
  std::string rain_state;        // canonical category code
  double visibility_m = 0;       // [0, 2000]
  double precip_1h = 0, precip_3h = 0, precip_6h = 0, precip_12h = 0, precip_24h = 0;
  std::map<std::string, double> sensors;  // optional extended sensors, keyed by column name
};

struct LatLon {
  double lat = 0;
  double lon = 0;
};

struct RoadSegment {
  std::string osm_id;
  int lanes = 1;
  std::string highway_class;
  double maxspeed_mph = 0;
  std::vector<LatLon> polyline;
  std::string name;
};

// Mean speed of one vehicle in one 10-minute window; the regression target.
struct WindowSample {
  std::int64_t window_index = 0;
  std::string journey_id;
  double mean_speed_mph = 0;
  int n_points = 0;
};

// Recommended range plus the components it was fused from.
struct SpeedInterval {
  double v_low = 0;
  double v_high = 0;
  double q25 = 0;
  double q75 = 0;
  double v_phys = 0;
  double v_law = 0;
};

struct PhysicsParams {
  double mu = 0.0;  // friction coefficient; RWIS grip used unchanged
  double g_ft_s2 = 32.174;
  double t_reaction_s = 2.5;
  double k_gap_s = 0.0;
  double ssd_cap_ft = 495.0;
};

}  // namespace safespeed
