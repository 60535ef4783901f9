#include "safespeed/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "safespeed/units.hpp"

namespace safespeed {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kMetersPerDegLat = 110540.0;
constexpr double kMetersPerDegLon = 111320.0;  // at the equator, scaled by cos(lat)
}  // namespace

double buffer_radius_ft(int lanes) {
  if (lanes < 1) throw std::invalid_argument("buffer_radius_ft: lanes must be >= 1");
  return lanes * 12.0 / 2.0;
}

ProjectedPoint project(LatLon point, LatLon origin) {
  const double y_m = (point.lat - origin.lat) * kMetersPerDegLat;
  const double x_m = (point.lon - origin.lon) * kMetersPerDegLon * std::cos(origin.lat * kPi / 180.0);
  return ProjectedPoint{x_m * kMToFt, y_m * kMToFt};
}

namespace {

double point_to_segment_sq(const ProjectedPoint& p, const ProjectedPoint& a, const ProjectedPoint& b) {
  const double abx = b.x_ft - a.x_ft;
  const double aby = b.y_ft - a.y_ft;
  const double apx = p.x_ft - a.x_ft;
  const double apy = p.y_ft - a.y_ft;
  const double len_sq = abx * abx + aby * aby;
  double t = 0.0;
  if (len_sq > 0) t = std::clamp((apx * abx + apy * aby) / len_sq, 0.0, 1.0);
  const double dx = apx - t * abx;
  const double dy = apy - t * aby;
  return dx * dx + dy * dy;
}

}  // namespace

double point_to_polyline_ft(const ProjectedPoint& p, const std::vector<ProjectedPoint>& polyline) {
  if (polyline.size() < 2) throw std::invalid_argument("point_to_polyline_ft: polyline needs >= 2 vertices");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    best = std::min(best, point_to_segment_sq(p, polyline[i], polyline[i + 1]));
  }
  return std::sqrt(best);
}

bool is_excluded(const RoadSegment& seg, double mainline_mph) {
  const std::string& hw = seg.highway_class;
  if (hw.size() >= 5 && hw.compare(hw.size() - 5, 5, "_link") == 0) return true;
  if (hw == "ramp") return true;
  return seg.maxspeed_mph != mainline_mph;
}

SegmentMatcher::SegmentMatcher(const std::vector<RoadSegment>& segments, LatLon origin) : origin_(origin) {
  entries_.reserve(segments.size());
  for (const auto& seg : segments) {
    if (seg.polyline.size() < 2) {
      throw std::invalid_argument("SegmentMatcher: segment " + seg.osm_id + " has < 2 vertices");
    }
    Entry e;
    e.osm_id = seg.osm_id;
    e.radius_ft = buffer_radius_ft(seg.lanes);
    e.polyline.reserve(seg.polyline.size());
    for (const auto& v : seg.polyline) e.polyline.push_back(project(v, origin));
    entries_.push_back(std::move(e));
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.osm_id < b.osm_id; });
}

std::optional<SegmentMatcher::Match> SegmentMatcher::match(LatLon point) const {
  const ProjectedPoint p = project(point, origin_);
  const Entry* best = nullptr;
  double best_dist = 0;
  for (const auto& e : entries_) {
    const double d = point_to_polyline_ft(p, e.polyline);
    if (d > e.radius_ft) continue;
    if (best == nullptr || d < best_dist) {  // equal distance keeps the smaller id
      best = &e;
      best_dist = d;
    }
  }
  if (!best) return std::nullopt;
  return Match{best->osm_id, best_dist};
}

std::optional<std::string> match_point(const CvPoint& p, const std::vector<RoadSegment>& segments,
                                       LatLon origin) {
  SegmentMatcher matcher(segments, origin);
  auto m = matcher.match(LatLon{p.latitude, p.longitude});
  if (!m) return std::nullopt;
  return m->osm_id;
}

namespace {

std::string json_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return std::to_string(v.get<double>());
  throw std::runtime_error("schema error: unsupported property type in network file");
}

int json_to_lanes(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    try {
      return std::stoi(v.get<std::string>());
    } catch (const std::exception&) {
      throw std::runtime_error("schema error: lanes is not an integer");
    }
  }
  throw std::runtime_error("schema error: lanes is not an integer");
}

double json_to_maxspeed(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    // accept "55 mph" style values
    std::size_t sp = s.find(' ');
    if (sp != std::string::npos) s = s.substr(0, sp);
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw std::runtime_error("schema error: maxspeed is not numeric: " + v.get<std::string>());
    }
  }
  throw std::runtime_error("schema error: maxspeed is not numeric");
}

}  // namespace

std::vector<RoadSegment> load_network_geojson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("io error: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("schema error: " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.contains("features") || !doc["features"].is_array()) {
    throw std::runtime_error("schema error: " + path + " has no features array");
  }
  std::vector<RoadSegment> segments;
  for (const auto& feat : doc["features"]) {
    if (!feat.contains("properties") || !feat.contains("geometry")) {
      throw std::runtime_error("schema error: feature missing properties or geometry");
    }
    const auto& props = feat["properties"];
    for (const char* key : {"osmid", "lanes", "highway", "maxspeed"}) {
      if (!props.contains(key)) {
        throw std::runtime_error(std::string("schema error: feature property missing: ") + key);
      }
    }
    const auto& geom = feat["geometry"];
    if (geom.value("type", "") != std::string("LineString")) {
      throw std::runtime_error("schema error: geometry type must be LineString");
    }
    RoadSegment seg;
    seg.osm_id = json_to_string(props["osmid"]);
    seg.lanes = json_to_lanes(props["lanes"]);
    seg.highway_class = props["highway"].get<std::string>();
    seg.maxspeed_mph = json_to_maxspeed(props["maxspeed"]);
    seg.name = props.value("name", "");
    for (const auto& coord : geom["coordinates"]) {
      if (!coord.is_array() || coord.size() < 2) {
        throw std::runtime_error("schema error: bad LineString coordinate");
      }
      seg.polyline.push_back(LatLon{coord[1].get<double>(), coord[0].get<double>()});
    }
    if (seg.lanes < 1) throw std::runtime_error("schema error: segment " + seg.osm_id + " has lanes < 1");
    if (seg.polyline.size() < 2) {
      throw std::runtime_error("schema error: segment " + seg.osm_id + " has < 2 vertices");
    }
    segments.push_back(std::move(seg));
  }
  return segments;
}

LatLon network_origin(const std::vector<RoadSegment>& segments) {
  if (segments.empty()) throw std::invalid_argument("network_origin: empty network");
  double lat_lo = 90, lat_hi = -90, lon_lo = 180, lon_hi = -180;
  for (const auto& seg : segments) {
    for (const auto& v : seg.polyline) {
      lat_lo = std::min(lat_lo, v.lat);
      lat_hi = std::max(lat_hi, v.lat);
      lon_lo = std::min(lon_lo, v.lon);
      lon_hi = std::max(lon_hi, v.lon);
    }
  }
  return LatLon{(lat_lo + lat_hi) / 2.0, (lon_lo + lon_hi) / 2.0};
}

}  // namespace safespeed
