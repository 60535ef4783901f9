// Acceptance gate for the safe-speed pipeline. Each check prints one
// [PASS]/[FAIL] line; the process exits nonzero if any check fails. All
// scratch data lands under the system temp directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "safespeed/commands.hpp"
#include "safespeed/csv.hpp"
#include "safespeed/envelope.hpp"
#include "safespeed/features.hpp"
#include "safespeed/geo.hpp"
#include "safespeed/metrics.hpp"
#include "safespeed/pipeline.hpp"
#include "safespeed/qrf.hpp"
#include "safespeed/rng.hpp"
#include "safespeed/run_config.hpp"
#include "safespeed/synth.hpp"
#include "safespeed/time_utils.hpp"
#include "safespeed/units.hpp"

using namespace safespeed;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "safespeed_acceptance" / name;
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

// The pipeline stages narrate to stdout; checks that drive them swallow that
// so the report stays one line per check.
class CoutSilencer {
 public:
  CoutSilencer() : old_(std::cout.rdbuf(sink_.rdbuf())) {}
  ~CoutSilencer() { std::cout.rdbuf(old_); }

 private:
  std::ostringstream sink_;
  std::streambuf* old_;
};

// ---------------------------------------------------------------------------
// Independent helpers used as oracles. These deliberately re-derive results
// from first principles instead of calling the code paths under test.

int walk_tree(const Tree& tree, const std::vector<double>& x) {
  int cur = 0;
  while (!tree.nodes[static_cast<std::size_t>(cur)].is_leaf()) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(cur)];
    cur = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return cur;
}

// Brute force: route the query and every training row through every tree and
// share each tree's mass equally across the rows in the query's leaf.
std::vector<double> oracle_weights(const Forest& forest,
                                   const std::vector<std::vector<double>>& rows,
                                   const std::vector<double>& x) {
  std::vector<double> w(rows.size(), 0.0);
  const double n_trees = static_cast<double>(forest.trees().size());
  for (const Tree& tree : forest.trees()) {
    const int leaf = walk_tree(tree, x);
    std::vector<std::size_t> sharers;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (walk_tree(tree, rows[i]) == leaf) sharers.push_back(i);
    for (std::size_t i : sharers)
      w[i] += 1.0 / (n_trees * static_cast<double>(sharers.size()));
  }
  return w;
}

double pt_seg_dist(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double cx = ax + t * dx, cy = ay + t * dy;
  return std::hypot(px - cx, py - cy);
}

struct Polygon {
  std::vector<double> xs, ys;
};

// Buffered straight segment as an explicit polygon: two long sides plus
// semicircular end caps densified to roughly one-foot arcs.
Polygon buffer_polygon(double ax, double ay, double bx, double by, double radius) {
  Polygon poly;
  const double len = std::hypot(bx - ax, by - ay);
  const double ux = (bx - ax) / len, uy = (by - ay) / len;
  const double nx = -uy, ny = ux;
  const int arc_steps = std::max(8, static_cast<int>(std::ceil(3.14159265358979 * radius)));
  const double base = std::atan2(ny, nx);
  // Side a->b on +n, cap at b sweeping +n to -n, side back, cap at a.
  poly.xs.push_back(ax + nx * radius);
  poly.ys.push_back(ay + ny * radius);
  poly.xs.push_back(bx + nx * radius);
  poly.ys.push_back(by + ny * radius);
  for (int s = 1; s < arc_steps; ++s) {
    const double ang = base - 3.14159265358979 * s / arc_steps;
    poly.xs.push_back(bx + radius * std::cos(ang));
    poly.ys.push_back(by + radius * std::sin(ang));
  }
  poly.xs.push_back(bx - nx * radius);
  poly.ys.push_back(by - ny * radius);
  poly.xs.push_back(ax - nx * radius);
  poly.ys.push_back(ay - ny * radius);
  for (int s = 1; s < arc_steps; ++s) {
    const double ang = base + 3.14159265358979 * (arc_steps - s) / arc_steps + 3.14159265358979;
    poly.xs.push_back(ax + radius * std::cos(ang));
    poly.ys.push_back(ay + radius * std::sin(ang));
  }
  return poly;
}

bool point_in_polygon(const Polygon& poly, double px, double py) {
  bool inside = false;
  const std::size_t n = poly.xs.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = poly.xs[i], yi = poly.ys[i];
    const double xj = poly.xs[j], yj = poly.ys[j];
    const bool crosses = (yi > py) != (yj > py);
    if (crosses && px < (xj - xi) * (py - yi) / (yj - yi) + xi) inside = !inside;
  }
  return inside;
}

double polygon_edge_distance(const Polygon& poly, double px, double py) {
  double best = 1e300;
  const std::size_t n = poly.xs.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    best = std::min(best, pt_seg_dist(px, py, poly.xs[j], poly.ys[j], poly.xs[i], poly.ys[i]));
  return best;
}

// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  std::function<bool(std::string&)> run;
};

// Check 1: weights, cdf and quantiles against brute-force leaf enumeration.
bool check_forest_oracle(std::string& detail) {
  const auto started = std::chrono::steady_clock::now();
  Rng rng(20230901);
  double worst_w = 0, worst_cdf = 0, worst_q = 0;
  int instances = 0;

  for (int round = 0; round < 60; ++round) {
    const std::size_t n = 10 + rng.below(41);   // <= 50 rows
    const std::size_t p = 1 + rng.below(6);     // <= 6 features
    std::vector<std::vector<double>> rows(n, std::vector<double>(p));
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) rows[i][j] = rng.uniform(0.0, 1.0);
      targets[i] = 20.0 + 50.0 * rows[i][0] + 2.0 * rng.normal();
    }
    ForestParams params;
    params.n_estimators = 1 + static_cast<int>(rng.below(5));  // <= 5 trees
    params.min_samples_leaf = 2 + static_cast<int>(rng.below(4));
    params.max_depth = rng.below(2) == 0 ? 0 : 4;
    const Forest forest = Forest::fit(rows, targets, params, 7000 + round);
    ++instances;

    std::vector<double> x(p);
    for (auto& v : x) v = rng.uniform(0.0, 1.0);
    const std::vector<double> expected = oracle_weights(forest, rows, x);
    const std::vector<double> got = forest.weights(x);
    for (std::size_t i = 0; i < n; ++i)
      worst_w = std::max(worst_w, std::abs(got[i] - expected[i]));

    // cdf at every target and between targets.
    std::vector<double> sorted_targets = targets;
    std::sort(sorted_targets.begin(), sorted_targets.end());
    std::vector<double> probes = {sorted_targets.front() - 1.0, sorted_targets.back() + 1.0};
    for (std::size_t i = 0; i < n; ++i) {
      probes.push_back(sorted_targets[i]);
      if (i + 1 < n) probes.push_back((sorted_targets[i] + sorted_targets[i + 1]) / 2);
    }
    for (double y : probes) {
      double oracle_cdf = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (targets[i] <= y) oracle_cdf += expected[i];
      worst_cdf = std::max(worst_cdf, std::abs(forest.cdf(x, y) - oracle_cdf));
    }

    // Quantiles: scan the oracle distribution; compare at probe levels placed
    // mid-gap in the cumulative mass plus the standard quartiles when they sit
    // clear of any tie.
    std::vector<std::pair<double, double>> vw;
    for (std::size_t i = 0; i < n; ++i)
      if (expected[i] > 0) vw.emplace_back(targets[i], expected[i]);
    std::sort(vw.begin(), vw.end());
    std::vector<double> cums(vw.size());
    double acc = 0;
    for (std::size_t i = 0; i < vw.size(); ++i) {
      acc += vw[i].second;
      cums[i] = acc;
    }
    std::vector<double> alphas;
    for (std::size_t k : {vw.size() / 5, vw.size() / 2, (4 * vw.size()) / 5}) {
      if (k + 1 >= vw.size()) continue;
      if (cums[k + 1] - cums[k] > 1e-6) alphas.push_back((cums[k] + cums[k + 1]) / 2);
    }
    for (double a : {0.25, 0.5, 0.75}) {
      bool near_tie = false;
      for (double c : cums) near_tie = near_tie || std::abs(c - a) < 1e-6;
      if (!near_tie) alphas.push_back(a);
    }
    for (double a : alphas) {
      double oracle_q = vw.back().first;
      for (std::size_t i = 0; i < vw.size(); ++i)
        if (cums[i] >= a) {
          oracle_q = vw[i].first;
          break;
        }
      worst_q = std::max(worst_q, std::abs(forest.predict_quantile(x, a) - oracle_q));
    }
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  detail = std::to_string(instances) + " instances, max |dw| " + fmt("%.2e", worst_w) +
           ", max |dF| " + fmt("%.2e", worst_cdf) + ", max |dq| " + fmt("%.2e", worst_q) + ", " +
           fmt("%.2f", seconds) + " s";
  return worst_w <= 1e-12 && worst_cdf <= 1e-12 && worst_q <= 1e-12 && seconds < 10.0;
}

// Check 2: weight normalization and a monotone conditional cdf.
bool check_normalization(std::string& detail) {
  Rng rng(20230902);
  double worst_sum = 0;
  bool monotone = true;
  int pairs = 0;

  for (int f = 0; f < 10; ++f) {
    const std::size_t n = 40 + rng.below(81);
    const std::size_t p = 2 + rng.below(4);
    std::vector<std::vector<double>> rows(n, std::vector<double>(p));
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) rows[i][j] = rng.uniform(0.0, 1.0);
      targets[i] = 30.0 + 25.0 * rows[i][0] + 3.0 * rng.normal();
    }
    ForestParams params;
    params.n_estimators = 10 + static_cast<int>(rng.below(21));
    params.min_samples_leaf = 2 + static_cast<int>(rng.below(7));
    const Forest forest = Forest::fit(rows, targets, params, 8000 + f);

    const auto [lo_it, hi_it] = std::minmax_element(targets.begin(), targets.end());
    for (int q = 0; q < 100; ++q) {
      std::vector<double> x(p);
      for (auto& v : x) v = rng.uniform(0.0, 1.0);
      const std::vector<double> w = forest.weights(x);
      double sum = 0;
      for (double wi : w) sum += wi;
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

      double prev = -1.0;
      for (int s = 0; s <= 24; ++s) {
        const double y = *lo_it - 1.0 + (*hi_it - *lo_it + 2.0) * s / 24.0;
        const double c = forest.cdf(x, y);
        if (c < prev) monotone = false;
        prev = c;
      }
      ++pairs;
    }
  }
  detail = std::to_string(pairs) + " forest/query pairs, max |sum-1| " + fmt("%.2e", worst_sum) +
           (monotone ? ", cdf monotone" : ", cdf NOT monotone");
  return worst_sum <= 1e-9 && monotone && pairs >= 1000;
}

// Check 3: calibration against known quantiles on a generated scenario.
bool check_calibration(std::string& detail) {
  const std::string out = scratch("calibration/out");
  RunConfig config = RunConfig::from_json_text(R"({
    "seed": 20230903,
    "paths": {"out_dir": "."},
    "forest": {"n_estimators": 200, "min_samples_leaf": 10},
    "train_ranges": [{"start": "2023-01-02T00:00:00Z", "end": "2023-01-22T00:00:00Z"}],
    "test_ranges": [{"start": "2023-01-22T00:00:00Z", "end": "2023-01-27T00:00:00Z"}],
    "synth": {
      "seed": 31,
      "start_time": "2023-01-02T00:00:00Z",
      "n_days": 25,
      "vehicles_per_window": 7.5,
      "points_per_vehicle": [3, 5],
      "script": [
        {"regime": "clear", "windows": 48},
        {"regime": "rain", "windows": 48},
        {"regime": "snow", "windows": 48}
      ]
    }
  })");
  config.out_dir = out;

  double train_seconds = 0;
  {
    const CoutSilencer quiet;
    cmd_synth(config);
    cmd_prepare(config);
    const auto started = std::chrono::steady_clock::now();
    cmd_train(config);
    train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }

  const Forest forest = Forest::load(config.resolved_model_path());
  const auto records = load_window_records(out + "/windows.csv", out + "/samples.csv",
                                           FeatureSchema::default_schema());

  std::map<std::int64_t, Quantiles> truth;
  {
    const CsvReader reader(out + "/truth.csv");
    const auto cols = reader.require_columns({"window_index", "true_q25", "true_q50", "true_q75"});
    for (std::size_t i = 0; i < reader.rows(); ++i) {
      Quantiles q;
      q.q25 = std::strtod(reader.row(i)[static_cast<std::size_t>(cols[1])].c_str(), nullptr);
      q.q50 = std::strtod(reader.row(i)[static_cast<std::size_t>(cols[2])].c_str(), nullptr);
      q.q75 = std::strtod(reader.row(i)[static_cast<std::size_t>(cols[3])].c_str(), nullptr);
      truth[std::strtoll(reader.row(i)[static_cast<std::size_t>(cols[0])].c_str(), nullptr, 10)] =
          q;
    }
  }

  std::size_t train_rows = 0, test_rows = 0, covered = 0;
  double err25 = 0, err50 = 0, err75 = 0;
  std::size_t test_windows = 0;
  for (const WindowRecord& rec : records) {
    if (window_in_ranges(rec.window_index, config.train_ranges)) {
      train_rows += rec.samples.size();
      continue;
    }
    if (!window_in_ranges(rec.window_index, config.test_ranges)) continue;
    const Quantiles q = forest.predict_window(rec.features);
    for (const WindowSample& s : rec.samples) {
      ++test_rows;
      covered += s.mean_speed_mph >= q.q25 && s.mean_speed_mph <= q.q75;
    }
    const Quantiles& t = truth.at(rec.window_index);
    err25 += std::abs(q.q25 - t.q25);
    err50 += std::abs(q.q50 - t.q50);
    err75 += std::abs(q.q75 - t.q75);
    ++test_windows;
  }
  const double picp = static_cast<double>(covered) / static_cast<double>(test_rows);
  err25 /= static_cast<double>(test_windows);
  err50 /= static_cast<double>(test_windows);
  err75 /= static_cast<double>(test_windows);

  detail = std::to_string(train_rows) + " train rows, " + std::to_string(test_rows) +
           " test rows, picp " + fmt("%.4f", picp) + ", quantile mae " + fmt("%.3f", err25) + "/" +
           fmt("%.3f", err50) + "/" + fmt("%.3f", err75) + " mph, train " +
           fmt("%.1f", train_seconds) + " s";
  return train_rows >= 20000 && test_rows >= 5000 && picp >= 0.44 && picp <= 0.56 &&
         err25 <= 1.5 && err50 <= 1.5 && err75 <= 1.5 && train_seconds < 120.0;
}

// Check 4: stopping-distance speed anchor and closed form versus bisection.
bool check_physics(std::string& detail) {
  PhysicsParams params;
  params.mu = 0.348;
  params.t_reaction_s = 2.5;
  params.k_gap_s = 0.0;
  params.ssd_cap_ft = 495.0;
  const EnvelopeResult anchor = solve_v_phys(0.348, 2000.0, params);
  const bool anchor_ok = anchor.d_visible_ft == 495.0 &&
                         std::abs(anchor.v_phys_mph - 55.0) <= 1.0;

  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double mu = 0.05 + 0.95 * i / 99.0;
    for (int j = 0; j < 100; ++j) {
      const double visibility = 10.0 + 690.0 * j / 99.0;
      PhysicsParams p = params;
      p.mu = mu;
      const EnvelopeResult r = solve_v_phys(mu, visibility, p);
      double lo = 0.0, hi = 300.0;
      for (int step = 0; step < 60; ++step) {
        const double mid = (lo + hi) / 2.0;
        (stopping_distance_ft(mid, p) <= r.d_visible_ft ? lo : hi) = mid;
      }
      worst = std::max(worst, std::abs(r.v_phys_mph - lo));
    }
  }
  detail = "anchor " + fmt("%.3f", anchor.v_phys_mph) + " mph at 495 ft, max |closed-bisect| " +
           fmt("%.2e", worst) + " mph over 10000 grid points";
  return anchor_ok && worst <= 0.01;
}

// Check 5: fusion invariants over random tuples.
bool check_fusion(std::string& detail) {
  Rng rng(20230905);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double q25 = rng.uniform(0.0, 90.0);
    const double q75 = q25 + rng.uniform(0.0, 30.0);
    const double v_phys = rng.uniform(0.0, 120.0);
    const double v_law = rng.uniform(20.0, 75.0);
    const SpeedInterval s = fuse(q25, q75, v_phys, v_law);
    const bool order = s.v_low <= s.v_high;
    const bool capped = s.v_high <= std::min(v_law, v_phys) + 0.0 && s.v_high <= q75;
    const bool exact_high = s.v_high == std::min({q75, v_phys, v_law});
    // Collapse rule: a lower quantile above the cap lands exactly on the cap.
    const bool collapse = q25 > s.v_high ? s.v_low == s.v_high : s.v_low == q25;
    if (!(order && capped && exact_high && collapse)) ++violations;
  }
  detail = "10000 tuples, " + std::to_string(violations) + " violations";
  return violations == 0;
}

// Check 6: the posted band identity.
bool check_posted(std::string& detail) {
  const PostedBand band = posted_band(55.0, 0.10);
  const double width = band.interval.hi - band.interval.lo;
  detail = "band [" + fmt("%.6f", band.interval.lo) + ", " + fmt("%.6f", band.interval.hi) +
           "], width " + fmt("%.6f", width);
  return band.interval.lo == 49.5 && band.interval.hi == 60.5 && width == 11.0 &&
         band.predictor == 55.0;
}

// Check 7: rolling baseline error ordering across a regime shift.
bool check_rolling_trend(std::string& detail) {
  const std::string out = scratch("rolling/out");
  RunConfig config = RunConfig::from_json_text(R"({
    "seed": 20230907,
    "paths": {"out_dir": "."},
    "synth": {
      "seed": 17,
      "start_time": "2023-01-02T00:00:00Z",
      "n_days": 2,
      "vehicles_per_window": 6,
      "script": [
        {"regime": "clear", "windows": 24},
        {"regime": "snow", "windows": 24}
      ]
    }
  })");
  config.out_dir = out;
  {
    const CoutSilencer quiet;
    cmd_synth(config);
    cmd_prepare(config);
  }

  const auto records = load_window_records(out + "/windows.csv", out + "/samples.csv",
                                           FeatureSchema::default_schema());
  auto run = [&records](int lookback) {
    std::map<std::int64_t, WindowPrediction> preds;
    for (const WindowRecord& rec : records) {
      const auto q = rolling_iqr(records, lookback, rec.window_index);
      if (!q) continue;
      preds[rec.window_index] = {q->q50, {q->q25, q->q75}};
    }
    return evaluate(records, preds, {}, {5.0}).overall.mae;
  };
  const double mae_6 = run(6);
  const double mae_12 = run(12);
  const double mae_24 = run(24);
  detail = "mae " + fmt("%.3f", mae_24) + " (24) >= " + fmt("%.3f", mae_12) + " (12) >= " +
           fmt("%.3f", mae_6) + " (6) mph";
  return mae_24 >= mae_12 && mae_12 >= mae_6;
}

// Check 8: matcher versus a dense polygon oracle, plus decoy rejection.
bool check_geo(std::string& detail) {
  // A corridor with varied widths and one diagonal segment.
  std::vector<RoadSegment> segments(4);
  segments[0] = {"way/2001", 2, "motorway", 55.0, {{42.9, -78.8}, {42.9, -78.8}}, "a"};
  segments[1] = {"way/2002", 2, "motorway", 55.0, {}, "b"};
  segments[2] = {"way/2003", 3, "motorway", 55.0, {}, "c"};
  segments[3] = {"way/2004", 1, "motorway", 55.0, {}, "d"};

  // Geometry is authored in feet and converted to degrees around an origin;
  // scales are measured from the projection itself so the inverse is exact.
  const LatLon origin{42.9, -78.8};
  const double scale_y = project({origin.lat + 0.001, origin.lon}, origin).y_ft / 0.001;
  const double scale_x = project({origin.lat, origin.lon + 0.001}, origin).x_ft / 0.001;
  const auto to_latlon = [&](double x_ft, double y_ft) {
    return LatLon{origin.lat + y_ft / scale_y, origin.lon + x_ft / scale_x};
  };
  const std::vector<std::vector<double>> coords = {
      {0, 0, 1200, 0},        // 2 lanes, radius 12
      {1200, 0, 2400, 0},     // collinear continuation, shared vertex
      {0, 80, 2400, 80},      // 3 lanes, radius 18, parallel
      {300, -200, 1500, 400}  // 1 lane, radius 6, diagonal
  };
  for (std::size_t i = 0; i < segments.size(); ++i) {
    segments[i].polyline = {to_latlon(coords[i][0], coords[i][1]),
                            to_latlon(coords[i][2], coords[i][3])};
  }
  const SegmentMatcher matcher(segments, origin);

  std::vector<Polygon> polygons;
  std::vector<double> radii;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const double radius = buffer_radius_ft(segments[i].lanes);
    polygons.push_back(
        buffer_polygon(coords[i][0], coords[i][1], coords[i][2], coords[i][3], radius));
    radii.push_back(radius);
  }

  Rng rng(20230908);
  int decided = 0, disagreements = 0;
  while (decided < 1500) {
    const double x = rng.uniform(-150.0, 2550.0);
    const double y = rng.uniform(-300.0, 500.0);
    // Skip the band where the densified polygon itself is ambiguous.
    double nearest_edge = 1e300;
    bool oracle_covered = false;
    for (const Polygon& poly : polygons) {
      nearest_edge = std::min(nearest_edge, polygon_edge_distance(poly, x, y));
      oracle_covered = oracle_covered || point_in_polygon(poly, x, y);
    }
    if (nearest_edge < 0.5) continue;
    ++decided;
    const auto match = matcher.match(to_latlon(x, y));
    if (match.has_value() != oracle_covered) ++disagreements;
  }

  // Decoy rejection on a generated scenario with labeled off-road vehicles.
  const std::string out = scratch("geo/out");
  ScenarioConfig synth = ScenarioConfig::from_json_text(R"({
    "seed": 23,
    "start_time": "2023-01-02T00:00:00Z",
    "n_days": 1,
    "vehicles_per_window": 5,
    "decoy_fraction": 0.2
  })");
  generate_scenario(synth, out);
  const auto network = load_network_geojson(out + "/network.geojson");
  std::vector<RoadSegment> usable;
  for (const RoadSegment& seg : network)
    if (!is_excluded(seg)) usable.push_back(seg);
  const SegmentMatcher scenario_matcher(usable, network_origin(usable));
  const CvParseResult cv = parse_cv(out + "/cv.csv");
  std::map<std::string, const CvPoint*> by_id;
  for (const CvPoint& p : cv.points) by_id[p.data_point_id] = &p;
  const CsvReader labels(out + "/labels.csv");
  const auto cols = labels.require_columns({"data_point_id", "is_decoy"});
  std::size_t decoy_points = 0, rejected = 0;
  for (std::size_t i = 0; i < labels.rows(); ++i) {
    if (labels.row(i)[static_cast<std::size_t>(cols[1])] != "1") continue;
    ++decoy_points;
    const CvPoint& p = *by_id.at(labels.row(i)[static_cast<std::size_t>(cols[0])]);
    rejected += !scenario_matcher.match({p.latitude, p.longitude}).has_value();
  }

  detail = std::to_string(decided) + " oracle points, " + std::to_string(disagreements) +
           " disagreements; " + std::to_string(rejected) + "/" + std::to_string(decoy_points) +
           " decoy points rejected";
  return decided >= 1000 && disagreements == 0 && decoy_points > 0 && rejected == decoy_points;
}

// Check 9: byte-identical pipeline outputs across runs and thread counts.
bool check_determinism(std::string& detail) {
  const std::string config_text = R"({
    "seed": 20230909,
    "threads": 1,
    "paths": {"out_dir": "."},
    "forest": {"n_estimators": 40, "min_samples_leaf": 8},
    "train_ranges": [{"start": "2023-01-02T00:00:00Z", "end": "2023-01-03T00:00:00Z"}],
    "test_ranges": [{"start": "2023-01-03T00:00:00Z", "end": "2023-01-04T00:00:00Z"}],
    "synth": {
      "seed": 11,
      "start_time": "2023-01-02T00:00:00Z",
      "n_days": 2,
      "vehicles_per_window": 5,
      "decoy_fraction": 0.05,
      "sensor_missing_rate": 0.1,
      "rwis_gap_rate": 0.05,
      "script": [
        {"regime": "clear", "windows": 18},
        {"regime": "rain", "windows": 9},
        {"regime": "snow", "windows": 9}
      ]
    }
  })";

  const auto run_chain = [&config_text](const std::string& dir, int threads) {
    const CoutSilencer quiet;
    RunConfig config = RunConfig::from_json_text(config_text);
    config.out_dir = dir;
    config.threads = threads;
    cmd_synth(config);
    cmd_prepare(config);
    cmd_train(config);
    cmd_recommend(config);
    cmd_evaluate(config);
  };

  const std::string dir_a = scratch("determinism/a");
  const std::string dir_b = scratch("determinism/b");
  const std::string dir_c = scratch("determinism/c");
  run_chain(dir_a, 1);
  run_chain(dir_b, 1);
  run_chain(dir_c, 3);

  const std::vector<std::string> files = {
      "cv.csv",      "rwis.csv",      "network.geojson",  "truth.csv",
      "labels.csv",  "manifest.json", "windows.csv",      "samples.csv",
      "model.qrf",   "recommend.csv", "eval_report.csv",  "eval_summary.txt",
      "prepare_summary.json"};
  std::vector<std::string> mismatched;
  for (const std::string& name : files) {
    const std::string a = read_file(dir_a + "/" + name);
    if (a != read_file(dir_b + "/" + name)) mismatched.push_back(name + " (rerun)");
    if (a != read_file(dir_c + "/" + name)) mismatched.push_back(name + " (threads)");
  }
  detail = std::to_string(files.size()) + " files compared across rerun and 3-thread run";
  if (!mismatched.empty()) {
    detail += "; mismatched:";
    for (const std::string& name : mismatched) detail += " " + name;
  }
  return mismatched.empty();
}

}  // namespace

int main() {
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / "safespeed_acceptance");

  const std::vector<Check> checks = {
      {"forest weights, cdf and quantiles match brute-force leaf enumeration",
       check_forest_oracle},
      {"weights normalize and the conditional cdf is monotone", check_normalization},
      {"quantile calibration on generated data with known quantiles", check_calibration},
      {"physics speed matches the 55 mph sight-distance anchor and bisection", check_physics},
      {"interval fusion invariants hold over random tuples", check_fusion},
      {"posted-limit band is exact at 55 mph and ten percent", check_posted},
      {"rolling baseline error is non-increasing with shorter lookback", check_rolling_trend},
      {"segment matching agrees with a dense polygon oracle and rejects decoys", check_geo},
      {"pipeline outputs are byte-identical across runs and thread counts", check_determinism},
  };

  int failures = 0;
  for (const Check& check : checks) {
    std::string det;
    bool pass = false;
    try {
      pass = check.run(det);
    } catch (const std::exception& e) {
      det = std::string("exception: ") + e.what();
    }
    if (!pass) ++failures;
    std::printf("[%s] %s (%s)\n", pass ? "PASS" : "FAIL", check.name.c_str(), det.c_str());
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("%d of %zu checks failed\n", failures, checks.size());
  else std::printf("all %zu checks passed\n", checks.size());
  return failures == 0 ? 0 : 1;
}
