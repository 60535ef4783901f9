#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "safespeed/types.hpp"

namespace safespeed {

enum class Encoding { numeric, one_hot, cyclic };

// Where a feature's raw value comes from:
//   - an RwisObservation field by name (surface_temp_c, grip, visibility_m,
//     rain_state, precip_1h ... precip_24h)
//   - "sensor:<column>" for the extended sensor map
//   - "window:hour", "window:day_of_week", "window:vehicle_count"
struct FeatureDescriptor {
  std::string name;
  std::string source;
  Encoding encoding = Encoding::numeric;
  std::vector<std::string> categories;  // one_hot only
  double period = 24.0;                 // cyclic only
  bool optional = false;                // sensor sources: impute default when absent
  double default_value = 0.0;
  bool missing_flag = false;            // emit a companion 0/1 indicator
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureDescriptor> features);

  static FeatureSchema default_schema();
  static FeatureSchema from_json_file(const std::string& path);
  std::string to_json() const;

  const std::vector<FeatureDescriptor>& features() const { return features_; }
  std::size_t dimension() const;
  std::vector<std::string> column_names() const;

 private:
  void validate() const;
  std::vector<FeatureDescriptor> features_;
};

// Deterministic encoding of one window's context into the schema's vector.
std::vector<double> build_features(const RwisObservation& rwis, std::int64_t window_index,
                                   int vehicle_count, const FeatureSchema& schema);

}  // namespace safespeed
