#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "safespeed/features.hpp"
#include "safespeed/types.hpp"

namespace safespeed {

// Raw station code -> canonical rain-state category. Keys are looked up
// after lowercasing and trimming the raw cell.
using RainCodeTable = std::map<std::string, std::string>;

RainCodeTable default_rain_codes();

struct CvParseResult {
  std::vector<CvPoint> points;
  std::size_t dropped = 0;
  std::map<std::string, std::size_t> drop_reasons;
};

struct RwisParseResult {
  std::vector<RwisObservation> observations;
  std::size_t dropped = 0;
  std::map<std::string, std::size_t> drop_reasons;
  std::size_t unknown_rain_codes = 0;  // rows kept, category set to unknown
};

// Delimited text with columns dataPointId, journeyId, capturedTimestamp,
// latitude, longitude, ignitionStatus, speed. Invalid rows are dropped and
// counted by reason.
CvParseResult parse_cv(const std::string& path);

// Delimited text with columns Timestamp, SurfaceTemp, Grip, RainState,
// Visibility, Precip1..Precip24; any further column lands in the extended
// sensor map (empty cells mean the sensor is absent for that row).
RwisParseResult parse_rwis(const std::string& path, const RainCodeTable& codes = default_rain_codes());

// 10-minute bins since the epoch.
std::int64_t window_index(std::int64_t epoch_sec);

// Group matched points by (window, journey) and average the speed in mph.
std::vector<WindowSample> aggregate_vehicle_windows(const std::vector<CvPoint>& matched_points,
                                                    int min_points = 1);

// Linear interpolation between order statistics at h = (n-1)p. The single
// quantile convention used everywhere in this project.
double interpolated_quantile(std::vector<double> values, double p);

struct Quantiles {
  double q25 = 0, q50 = 0, q75 = 0;
};

Quantiles observed_quantiles(const std::vector<WindowSample>& samples);

// One fully assembled (window, weather) training/evaluation record.
struct WindowRecord {
  std::int64_t window_index = 0;
  std::vector<double> features;
  std::vector<WindowSample> samples;
  double observed_q25 = 0, observed_q50 = 0, observed_q75 = 0;
  int vehicle_count = 0;
};

struct AlignResult {
  std::vector<WindowRecord> records;  // ascending window_index
  std::size_t windows_dropped_no_rwis = 0;
  std::size_t duplicate_rwis = 0;  // extra observations in an already-seen window
};

AlignResult align_weather(const std::vector<WindowSample>& samples,
                          const std::vector<RwisObservation>& rwis, const FeatureSchema& schema);

// window_index, window_start, <feature columns>, observed quantiles, count.
std::string windows_csv(const std::vector<WindowRecord>& records, const FeatureSchema& schema);
std::string samples_csv(const std::vector<WindowRecord>& records);

// Loaders reattach samples to their windows; feature columns must match the
// schema exactly.
std::vector<WindowRecord> load_window_records(const std::string& windows_path,
                                              const std::string& samples_path,
                                              const FeatureSchema& schema);

}  // namespace safespeed
