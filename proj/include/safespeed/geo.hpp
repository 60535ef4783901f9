#pragma once

#include <optional>
#include <string>
#include <vector>

#include "safespeed/types.hpp"

namespace safespeed {

// Planar work frame, feet east/north of a reference origin.
struct ProjectedPoint {
  double x_ft = 0;
  double y_ft = 0;
};

// Half the total road width at 12 ft per lane.
double buffer_radius_ft(int lanes);

// Local equirectangular projection. Adequate inside the study box, where the
// error against geodesic distances is far below one lane width.
ProjectedPoint project(LatLon point, LatLon origin);

// Minimum distance from p to any segment of the polyline.
double point_to_polyline_ft(const ProjectedPoint& p, const std::vector<ProjectedPoint>& polyline);

// Ramps and off-scope segments. Mainline means the target posted limit.
bool is_excluded(const RoadSegment& seg, double mainline_mph = 55.0);

// Matches GPS points against buffered centerlines: nearest segment whose
// distance is within that segment's own buffer radius. Ties go to the
// smallest distance, then the lexicographically smallest id.
class SegmentMatcher {
 public:
  struct Match {
    std::string osm_id;
    double distance_ft = 0;
  };

  // Caller filters excluded segments first.
  SegmentMatcher(const std::vector<RoadSegment>& segments, LatLon origin);

  std::optional<Match> match(LatLon point) const;

  LatLon origin() const { return origin_; }

 private:
  struct Entry {
    std::string osm_id;
    double radius_ft;
    std::vector<ProjectedPoint> polyline;
  };
  std::vector<Entry> entries_;  // ascending osm_id
  LatLon origin_;
};

// One-shot convenience over SegmentMatcher.
std::optional<std::string> match_point(const CvPoint& p, const std::vector<RoadSegment>& segments,
                                       LatLon origin);

// Feature-collection file with one LineString feature per segment and
// properties osmid, lanes, highway, maxspeed, name.
std::vector<RoadSegment> load_network_geojson(const std::string& path);

// Midpoint of the network bounding box; the shared projection origin.
LatLon network_origin(const std::vector<RoadSegment>& segments);

}  // namespace safespeed
