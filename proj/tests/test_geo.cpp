#include "doctest.h"
#include "safespeed/geo.hpp"
#include "safespeed/rng.hpp"
#include "safespeed/units.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace safespeed;

namespace {

constexpr double kPi = 3.14159265358979323846;

RoadSegment make_segment(const std::string& id, double lat0, double lon0, double lat1, double lon1,
                         int lanes = 2, const std::string& highway = "motorway",
                         double maxspeed = 55.0) {
  RoadSegment seg;
  seg.osm_id = id;
  seg.lanes = lanes;
  seg.highway_class = highway;
  seg.maxspeed_mph = maxspeed;
  seg.polyline = {LatLon{lat0, lon0}, LatLon{lat1, lon1}};
  return seg;
}

// Great-circle distance, the reference the planar frame is checked against.
double haversine_ft(LatLon a, LatLon b) {
  const double r_earth_m = 6371000.0;
  const double phi1 = a.lat * kPi / 180.0;
  const double phi2 = b.lat * kPi / 180.0;
  const double dphi = (b.lat - a.lat) * kPi / 180.0;
  const double dlam = (b.lon - a.lon) * kPi / 180.0;
  const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2) * std::sin(dlam / 2);
  return 2.0 * r_earth_m * std::asin(std::sqrt(h)) * kMToFt;
}

}  // namespace

TEST_CASE("buffer radius is half the paved width") {
  CHECK(buffer_radius_ft(1) == doctest::Approx(6.0));
  CHECK(buffer_radius_ft(2) == doctest::Approx(12.0));
  CHECK(buffer_radius_ft(3) == doctest::Approx(18.0));
  CHECK_THROWS_AS(buffer_radius_ft(0), std::invalid_argument);
  CHECK_THROWS_AS(buffer_radius_ft(-2), std::invalid_argument);
}

TEST_CASE("projection scales degrees to feet") {
  const LatLon origin{42.9, -78.8};
  // One millidegree of latitude spans 110.54 m (362.66 ft) regardless of
  // longitude.
  const ProjectedPoint north = project(LatLon{42.901, -78.8}, origin);
  CHECK(north.x_ft == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(north.y_ft == doctest::Approx(362.66).epsilon(1e-4));
  // Longitude shrinks with cos(latitude).
  const ProjectedPoint east = project(LatLon{42.9, -78.799}, origin);
  CHECK(east.y_ft == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(east.x_ft ==
        doctest::Approx(111320.0 * std::cos(42.9 * kPi / 180.0) * 0.001 * kMToFt).epsilon(1e-9));
  const ProjectedPoint self = project(origin, origin);
  CHECK(self.x_ft == 0.0);
  CHECK(self.y_ft == 0.0);
}

TEST_CASE("planar distances stay within a percent of great-circle") {
  // The projection's 110540 m/deg latitude scale is ellipsoidal while the
  // haversine reference assumes a 6371 km sphere (111195 m/deg), so 0.59%
  // disagreement is inherent. 1% still catches a dropped cos(lat) (~27% here).
  const LatLon origin{42.9, -78.8};
  Rng rng(20240717);
  for (int i = 0; i < 500; ++i) {
    const LatLon a{origin.lat + rng.uniform(-0.05, 0.05), origin.lon + rng.uniform(-0.05, 0.05)};
    const LatLon b{origin.lat + rng.uniform(-0.05, 0.05), origin.lon + rng.uniform(-0.05, 0.05)};
    const ProjectedPoint pa = project(a, origin);
    const ProjectedPoint pb = project(b, origin);
    const double planar = std::hypot(pa.x_ft - pb.x_ft, pa.y_ft - pb.y_ft);
    const double reference = haversine_ft(a, b);
    if (reference < 50.0) continue;  // relative error is meaningless at tiny spans
    CHECK(std::abs(planar - reference) / reference < 0.01);
  }
}

TEST_CASE("point to polyline distance") {
  const std::vector<ProjectedPoint> seg = {{0, 0}, {10, 0}};
  CHECK(point_to_polyline_ft({5, 4}, seg) == doctest::Approx(4.0));
  CHECK(point_to_polyline_ft({5, -4}, seg) == doctest::Approx(4.0));
  // Beyond the end the nearest point is the endpoint (3-4-5 triangle).
  CHECK(point_to_polyline_ft({13, 4}, seg) == doctest::Approx(5.0));
  CHECK(point_to_polyline_ft({-3, -4}, seg) == doctest::Approx(5.0));
  // On the line.
  CHECK(point_to_polyline_ft({7, 0}, seg) == doctest::Approx(0.0));
  // Multi-vertex polyline picks the nearest segment.
  const std::vector<ProjectedPoint> bend = {{0, 0}, {10, 0}, {10, 10}};
  CHECK(point_to_polyline_ft({12, 8}, bend) == doctest::Approx(2.0));
  CHECK_THROWS_AS(point_to_polyline_ft({0, 0}, std::vector<ProjectedPoint>{{1, 1}}),
                  std::invalid_argument);
}

TEST_CASE("exclusion covers ramps and foreign speed limits") {
  CHECK_FALSE(is_excluded(make_segment("way/1", 42.9, -78.8, 42.9, -78.79)));
  CHECK(is_excluded(make_segment("way/2", 42.9, -78.8, 42.9, -78.79, 2, "motorway_link")));
  CHECK(is_excluded(make_segment("way/3", 42.9, -78.8, 42.9, -78.79, 2, "trunk_link")));
  CHECK(is_excluded(make_segment("way/4", 42.9, -78.8, 42.9, -78.79, 2, "ramp")));
  CHECK(is_excluded(make_segment("way/5", 42.9, -78.8, 42.9, -78.79, 2, "motorway", 65.0)));
  CHECK(is_excluded(make_segment("way/6", 42.9, -78.8, 42.9, -78.79, 2, "motorway", 45.0)));
}

TEST_CASE("matcher accepts in-buffer points and rejects the rest") {
  // Two colinear east-west segments along latitude 42.9, two lanes -> 12 ft.
  const double dlat_per_ft = 1.0 / (110540.0 * kMToFt);
  const double dlon_per_ft = 1.0 / (111320.0 * std::cos(42.9 * kPi / 180.0) * kMToFt);
  std::vector<RoadSegment> network = {
      make_segment("way/10", 42.9, -78.8, 42.9, -78.8 + 1000 * dlon_per_ft),
      make_segment("way/11", 42.9, -78.8 + 1000 * dlon_per_ft, 42.9, -78.8 + 2000 * dlon_per_ft),
  };
  const SegmentMatcher matcher(network, network_origin(network));

  // 5 ft north of the first segment's midpoint.
  auto hit = matcher.match(LatLon{42.9 + 5 * dlat_per_ft, -78.8 + 500 * dlon_per_ft});
  REQUIRE(hit.has_value());
  CHECK(hit->osm_id == "way/10");
  CHECK(hit->distance_ft == doctest::Approx(5.0).epsilon(1e-3));

  // Interior of the second segment.
  hit = matcher.match(LatLon{42.9 - 11 * dlat_per_ft, -78.8 + 1500 * dlon_per_ft});
  REQUIRE(hit.has_value());
  CHECK(hit->osm_id == "way/11");

  // 13 ft off the centerline is outside a 12 ft buffer.
  CHECK_FALSE(matcher.match(LatLon{42.9 + 13 * dlat_per_ft, -78.8 + 500 * dlon_per_ft}));
  // Far away.
  CHECK_FALSE(matcher.match(LatLon{43.2, -78.8}));

  // Equidistant from both segments at the shared vertex: the smaller id wins.
  hit = matcher.match(LatLon{42.9 + 3 * dlat_per_ft, -78.8 + 1000 * dlon_per_ft});
  REQUIRE(hit.has_value());
  CHECK(hit->osm_id == "way/10");
}

TEST_CASE("wider roads keep points that narrow roads reject") {
  const double dlat_per_ft = 1.0 / (110540.0 * kMToFt);
  const double dlon_per_ft = 1.0 / (111320.0 * std::cos(42.9 * kPi / 180.0) * kMToFt);
  for (int lanes = 1; lanes <= 4; ++lanes) {
    std::vector<RoadSegment> network = {
        make_segment("way/20", 42.9, -78.8, 42.9, -78.8 + 1000 * dlon_per_ft, lanes)};
    const SegmentMatcher matcher(network, network_origin(network));
    const double radius = buffer_radius_ft(lanes);
    const LatLon inside{42.9 + (radius - 0.5) * dlat_per_ft, -78.8 + 500 * dlon_per_ft};
    const LatLon outside{42.9 + (radius + 0.5) * dlat_per_ft, -78.8 + 500 * dlon_per_ft};
    CHECK(matcher.match(inside).has_value());
    CHECK_FALSE(matcher.match(outside).has_value());
  }
}

TEST_CASE("matcher agrees with a dense-sampling oracle") {
  // Oracle: densify every centerline at half-foot steps; a point is covered
  // iff some sampled centerline point lies within the radius. Points whose
  // oracle distance is within a step of the boundary are skipped, where
  // sampling cannot decide.
  const LatLon origin{42.9, -78.8};
  const double dlat_per_ft = 1.0 / (110540.0 * kMToFt);
  const double dlon_per_ft = 1.0 / (111320.0 * std::cos(42.9 * kPi / 180.0) * kMToFt);
  std::vector<RoadSegment> network = {
      make_segment("way/30", 42.9, -78.8, 42.9, -78.8 + 900 * dlon_per_ft),
      make_segment("way/31", 42.9, -78.8 + 900 * dlon_per_ft, 42.9 + 600 * dlat_per_ft,
                   -78.8 + 1500 * dlon_per_ft, 3),
  };
  const SegmentMatcher matcher(network, origin);

  const double step = 0.5;
  std::vector<ProjectedPoint> dense;
  std::vector<double> dense_radius;
  for (const RoadSegment& seg : network) {
    const double radius = buffer_radius_ft(seg.lanes);
    for (std::size_t v = 0; v + 1 < seg.polyline.size(); ++v) {
      const ProjectedPoint a = project(seg.polyline[v], origin);
      const ProjectedPoint b = project(seg.polyline[v + 1], origin);
      const double len = std::hypot(b.x_ft - a.x_ft, b.y_ft - a.y_ft);
      const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
      for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        dense.push_back({a.x_ft + t * (b.x_ft - a.x_ft), a.y_ft + t * (b.y_ft - a.y_ft)});
        dense_radius.push_back(radius);
      }
    }
  }

  Rng rng(988);
  int decided = 0;
  for (int i = 0; i < 4000; ++i) {
    const LatLon p{42.9 + rng.uniform(-40, 700) * dlat_per_ft,
                   -78.8 + rng.uniform(-60, 1600) * dlon_per_ft};
    const ProjectedPoint q = project(p, origin);
    bool covered = false;
    bool ambiguous = false;
    for (std::size_t d = 0; d < dense.size(); ++d) {
      const double dist = std::hypot(q.x_ft - dense[d].x_ft, q.y_ft - dense[d].y_ft);
      if (dist <= dense_radius[d]) covered = true;
      if (std::abs(dist - dense_radius[d]) <= step) ambiguous = true;
    }
    if (ambiguous && !covered) continue;
    ++decided;
    CHECK(matcher.match(p).has_value() == covered);
  }
  CHECK(decided > 1000);
}
