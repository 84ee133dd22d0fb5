#include "xwalk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "xwalk/error.hpp"
#include "xwalk/postprocess.hpp"
#include "xwalk/spatial_index.hpp"

namespace xwalk {
namespace {

constexpr double kCrosswalkOffsetFt = 20.0;
constexpr double kClutterIntersectionPadFt = 10.0;
constexpr double kClutterLateralMaxFt = 40.0;
constexpr double kDupOffsetMinFt = 2.0;
constexpr double kDupOffsetMaxFt = 18.0;
constexpr double kLineJitterFt = 2.0;

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double truncated_normal(Rng& rng, double sigma) {
  const double v = std::normal_distribution<double>(0.0, sigma)(rng);
  return std::clamp(v, -3.0 * sigma, 3.0 * sigma);
}

void check_rate(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(std::string("scenario: ") + name +
                          " must be in [0, 1]");
  }
}

void check_range(const std::pair<double, double>& r, const char* name) {
  if (!(r.first >= 0.0 && r.first <= r.second && r.second <= 1.0)) {
    throw ValidationError(std::string("scenario: ") + name +
                          " must be an ordered range within [0, 1]");
  }
}

}  // namespace

void ScenarioSpec::validate() const {
  if (!extent.valid() || extent.width() <= 0.0 || extent.height() <= 0.0) {
    throw ValidationError("scenario: extent must have positive area");
  }
  if (!(grid_spacing_ft > 0.0)) {
    throw ValidationError("scenario: grid_spacing_ft must be > 0");
  }
  if (road_count < 2) {
    throw ValidationError("scenario: road_count must be >= 2");
  }
  if (diagonal_count < 0) {
    throw ValidationError("scenario: diagonal_count must be >= 0");
  }
  if (crosswalks_per_intersection < 0 || crosswalks_per_intersection > 4) {
    throw ValidationError("scenario: crosswalks_per_intersection must be in [0, 4]");
  }
  if (planted_new < 0 || planted_removed < 0) {
    throw ValidationError("scenario: planted counts must be >= 0");
  }
  if (jitter_sigma_ft < 0.0) {
    throw ValidationError("scenario: jitter_sigma_ft must be >= 0");
  }
  check_rate(drop_rate, "drop_rate");
  check_rate(duplicate_rate, "duplicate_rate");
  check_rate(clutter_rate, "clutter_rate");
  check_range(clutter_confidence_range, "clutter_confidence_range");
  check_range(true_confidence_range, "true_confidence_range");
}

namespace {

RoadNetwork build_roads(const ScenarioSpec& spec, Rng& rng,
                        std::vector<double>& xs, std::vector<double>& ys) {
  const int n_v = (spec.road_count + 1) / 2;
  const int n_h = spec.road_count / 2;
  const double margin = spec.grid_spacing_ft / 2.0;
  const double need_w = 2.0 * margin + (n_v - 1) * spec.grid_spacing_ft;
  const double need_h = 2.0 * margin + (n_h - 1) * spec.grid_spacing_ft;
  if (need_w > spec.extent.width() || need_h > spec.extent.height()) {
    throw ValidationError(
        "scenario: extent too small for road_count at grid_spacing_ft");
  }

  xs.clear();
  ys.clear();
  for (int i = 0; i < n_v; ++i) {
    xs.push_back(spec.extent.x_min + margin + i * spec.grid_spacing_ft +
                 uniform(rng, -kLineJitterFt, kLineJitterFt));
  }
  for (int j = 0; j < n_h; ++j) {
    ys.push_back(spec.extent.y_min + margin + j * spec.grid_spacing_ft +
                 uniform(rng, -kLineJitterFt, kLineJitterFt));
  }

  RoadNetwork net;
  std::int64_t id = 0;
  const auto system_of = [](std::int64_t line_id) {
    return line_id % 3 == 0 ? RoadSystem::On : RoadSystem::Off;
  };

  for (const double x : xs) {
    std::vector<WorldPoint> v;
    v.push_back({x, spec.extent.y_min});
    for (const double y : ys) v.push_back({x, y});
    v.push_back({x, spec.extent.y_max});
    net.polylines.push_back({Polyline(id, std::move(v)), system_of(id), {}});
    ++id;
  }
  for (const double y : ys) {
    std::vector<WorldPoint> v;
    v.push_back({spec.extent.x_min, y});
    for (const double x : xs) v.push_back({x, y});
    v.push_back({spec.extent.x_max, y});
    net.polylines.push_back({Polyline(id, std::move(v)), system_of(id), {}});
    ++id;
  }
  for (int k = 0; k < spec.diagonal_count; ++k) {
    const double f = static_cast<double>(k + 1) / (spec.diagonal_count + 1);
    std::vector<WorldPoint> v;
    v.push_back({spec.extent.x_min, spec.extent.y_min + f * spec.extent.height()});
    v.push_back({spec.extent.x_max,
                 spec.extent.y_min + (1.0 - f) * spec.extent.height()});
    net.polylines.push_back({Polyline(id, std::move(v)), system_of(id), {}});
    ++id;
  }
  return net;
}

double min_dist_to(const std::vector<WorldPoint>& pts, const WorldPoint& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const WorldPoint& q : pts) best = std::min(best, dist_pp(q, p));
  return best;
}

}  // namespace

Scenario gen_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  Scenario s;
  s.spec = spec;

  std::vector<double> xs, ys;
  s.truth.roads = build_roads(spec, rng, xs, ys);
  const std::vector<IntersectionPoint> junctions =
      derive_intersections(s.truth.roads, 1.0);

  // Ground-truth crosswalks sit just off the junction along the legs.
  static const WorldPoint offsets[4] = {{kCrosswalkOffsetFt, 0.0},
                                        {0.0, kCrosswalkOffsetFt},
                                        {-kCrosswalkOffsetFt, 0.0},
                                        {0.0, -kCrosswalkOffsetFt}};
  std::vector<WorldPoint> crosswalks;
  for (const IntersectionPoint& j : junctions) {
    for (int k = 0; k < spec.crosswalks_per_intersection; ++k) {
      const WorldPoint p{j.pos.x + offsets[k].x, j.pos.y + offsets[k].y};
      if (spec.extent.contains(p)) crosswalks.push_back(p);
    }
  }

  // Mid-block edge midpoints host planted changes.
  std::vector<WorldPoint> edges;
  for (const double x : xs) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      edges.push_back({x, (ys[j] + ys[j + 1]) / 2.0});
    }
  }
  for (const double y : ys) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      edges.push_back({(xs[i] + xs[i + 1]) / 2.0, y});
    }
  }
  std::shuffle(edges.begin(), edges.end(), rng);

  const double sep = kPlantSeparationFt + kPlacementPadFt;
  std::vector<WorldPoint> planted;
  std::size_t cursor = 0;
  const auto take_planted = [&](int count, std::vector<WorldPoint>& out) {
    while (static_cast<int>(out.size()) < count) {
      if (cursor >= edges.size()) {
        throw ValidationError(
            "scenario: extent too small to plant the requested changes");
      }
      const WorldPoint p = edges[cursor++];
      if (min_dist_to(crosswalks, p) < sep || min_dist_to(planted, p) < sep) {
        continue;
      }
      out.push_back(p);
      planted.push_back(p);
    }
  };
  take_planted(spec.planted_new, s.truth.expected_new_changes);
  take_planted(spec.planted_removed, s.truth.expected_removed_changes);

  s.truth.gt_old = crosswalks;
  s.truth.gt_old.insert(s.truth.gt_old.end(),
                        s.truth.expected_removed_changes.begin(),
                        s.truth.expected_removed_changes.end());
  s.truth.gt_new = crosswalks;
  s.truth.gt_new.insert(s.truth.gt_new.end(),
                        s.truth.expected_new_changes.begin(),
                        s.truth.expected_new_changes.end());

  // Shared lookup structures for clutter placement.
  std::vector<std::pair<std::int64_t, WorldPoint>> junction_entries;
  for (std::size_t i = 0; i < junctions.size(); ++i) {
    junction_entries.emplace_back(static_cast<std::int64_t>(i), junctions[i].pos);
  }
  const PointIndex junction_index(junction_entries);

  std::vector<std::pair<std::int64_t, WorldPoint>> truth_entries;
  for (std::size_t i = 0; i < s.truth.gt_old.size(); ++i) {
    truth_entries.emplace_back(static_cast<std::int64_t>(i), s.truth.gt_old[i]);
  }
  for (std::size_t i = 0; i < s.truth.gt_new.size(); ++i) {
    truth_entries.emplace_back(
        static_cast<std::int64_t>(s.truth.gt_old.size() + i), s.truth.gt_new[i]);
  }
  const PointIndex truth_index(truth_entries);

  std::vector<WorldPoint> clutter_all;

  const auto emit_epoch = [&](Epoch epoch, const std::vector<WorldPoint>& truth,
                              std::vector<WorldPoint>& clutter_out,
                              std::vector<DetectionRecord>& out) {
    const std::string prefix(epoch_name(epoch));
    const auto next_id = [&] { return prefix + "-" + std::to_string(out.size() + 1); };

    for (const WorldPoint& t : truth) {
      if (spec.drop_rate > 0.0 && uniform(rng, 0.0, 1.0) < spec.drop_rate) {
        continue;
      }
      WorldPoint pos = t;
      if (spec.jitter_sigma_ft > 0.0) {
        pos.x += truncated_normal(rng, spec.jitter_sigma_ft);
        pos.y += truncated_normal(rng, spec.jitter_sigma_ft);
      }
      const double conf = uniform(rng, spec.true_confidence_range.first,
                                  spec.true_confidence_range.second);
      out.push_back({next_id(), pos, conf, epoch, {}});

      if (spec.duplicate_rate > 0.0 && uniform(rng, 0.0, 1.0) < spec.duplicate_rate) {
        const double ang = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const double r = uniform(rng, kDupOffsetMinFt, kDupOffsetMaxFt);
        const WorldPoint dup_pos{pos.x + r * std::cos(ang),
                                 pos.y + r * std::sin(ang)};
        const double dup_conf = conf * uniform(rng, 0.7, 0.95);
        out.push_back({next_id(), dup_pos, dup_conf, epoch, {}});
      }
    }

    const auto clutter_count = static_cast<std::size_t>(
        std::llround(spec.clutter_rate * static_cast<double>(truth.size())));
    for (std::size_t k = 0; k < clutter_count; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        const auto line_idx = static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(
            0, s.truth.roads.polylines.size() - 1)(rng));
        const auto& verts = s.truth.roads.polylines[line_idx].line.vertices();
        const auto seg = static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(
            0, verts.size() - 2)(rng));
        const double t = uniform(rng, 0.0, 1.0);
        const WorldPoint a = verts[seg], b = verts[seg + 1];
        const double len = dist_pp(a, b);
        const double nx = (b.y - a.y) / len, ny = -(b.x - a.x) / len;
        const double lat = uniform(rng, -kClutterLateralMaxFt, kClutterLateralMaxFt);
        const WorldPoint p{a.x + t * (b.x - a.x) + nx * lat,
                           a.y + t * (b.y - a.y) + ny * lat};
        if (!spec.extent.contains(p)) continue;
        const auto nearest_junction = junction_index.query_nearest(p);
        if (nearest_junction &&
            nearest_junction->distance_ft <=
                90.0 + kClutterIntersectionPadFt) {
          continue;
        }
        const auto nearest_truth = truth_index.query_nearest(p);
        if (nearest_truth && nearest_truth->distance_ft < sep) continue;
        if (min_dist_to(clutter_all, p) < sep) continue;
        const double conf = uniform(rng, spec.clutter_confidence_range.first,
                                    spec.clutter_confidence_range.second);
        out.push_back({next_id(), p, conf, epoch, {}});
        clutter_out.push_back(p);
        clutter_all.push_back(p);
        placed = true;
      }
      if (!placed) {
        throw ValidationError(
            "scenario: could not place clutter under the separation rules");
      }
    }
  };

  emit_epoch(Epoch::Old, s.truth.gt_old, s.truth.clutter_old, s.old_detections);
  emit_epoch(Epoch::New, s.truth.gt_new, s.truth.clutter_new, s.new_detections);
  return s;
}

namespace {

using nlohmann::json;

std::pair<double, double> range_from_json(const json& j, const std::string& key,
                                          const std::string& source) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(source + ": " + key + " must be [lo, hi]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

ScenarioSpec scenario_spec_from_json(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError(source + ": expected a JSON object");
  }

  ScenarioSpec spec;
  for (const auto& [key, value] : doc.items()) {
    if (key == "seed") {
      spec.seed = value.get<std::uint64_t>();
    } else if (key == "extent") {
      if (!value.is_object()) {
        throw ValidationError(source + ": extent must be an object");
      }
      spec.extent = Rect{value.value("x_min", 0.0), value.value("y_min", 0.0),
                         value.value("x_max", 0.0), value.value("y_max", 0.0)};
    } else if (key == "grid_spacing_ft") {
      spec.grid_spacing_ft = value.get<double>();
    } else if (key == "road_count") {
      spec.road_count = value.get<int>();
    } else if (key == "diagonal_count") {
      spec.diagonal_count = value.get<int>();
    } else if (key == "crosswalks_per_intersection") {
      spec.crosswalks_per_intersection = value.get<int>();
    } else if (key == "planted_new") {
      spec.planted_new = value.get<int>();
    } else if (key == "planted_removed") {
      spec.planted_removed = value.get<int>();
    } else if (key == "jitter_sigma_ft") {
      spec.jitter_sigma_ft = value.get<double>();
    } else if (key == "drop_rate") {
      spec.drop_rate = value.get<double>();
    } else if (key == "duplicate_rate") {
      spec.duplicate_rate = value.get<double>();
    } else if (key == "clutter_rate") {
      spec.clutter_rate = value.get<double>();
    } else if (key == "clutter_confidence_range") {
      spec.clutter_confidence_range = range_from_json(value, key, source);
    } else if (key == "true_confidence_range") {
      spec.true_confidence_range = range_from_json(value, key, source);
    } else {
      throw ValidationError(source + ": unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

std::string scenario_spec_to_json(const ScenarioSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["extent"] = {{"x_min", spec.extent.x_min},
                 {"y_min", spec.extent.y_min},
                 {"x_max", spec.extent.x_max},
                 {"y_max", spec.extent.y_max}};
  j["grid_spacing_ft"] = spec.grid_spacing_ft;
  j["road_count"] = spec.road_count;
  j["diagonal_count"] = spec.diagonal_count;
  j["crosswalks_per_intersection"] = spec.crosswalks_per_intersection;
  j["planted_new"] = spec.planted_new;
  j["planted_removed"] = spec.planted_removed;
  j["jitter_sigma_ft"] = spec.jitter_sigma_ft;
  j["drop_rate"] = spec.drop_rate;
  j["duplicate_rate"] = spec.duplicate_rate;
  j["clutter_rate"] = spec.clutter_rate;
  j["clutter_confidence_range"] = {spec.clutter_confidence_range.first,
                                   spec.clutter_confidence_range.second};
  j["true_confidence_range"] = {spec.true_confidence_range.first,
                                spec.true_confidence_range.second};
  return j.dump(2) + "\n";
}

namespace {

std::string roads_geojson(const RoadNetwork& net, const std::string& crs_label) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["crs"] = {{"type", "name"}, {"properties", {{"name", crs_label}}}};
  doc["features"] = json::array();
  for (const RoadPolyline& rp : net.polylines) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"]["type"] = "LineString";
    json coords = json::array();
    for (const WorldPoint& p : rp.line.vertices()) {
      coords.push_back({p.x, p.y});
    }
    f["geometry"]["coordinates"] = std::move(coords);
    f["properties"]["system"] = std::string(road_system_name(rp.system));
    if (rp.name) f["properties"]["name"] = *rp.name;
    doc["features"].push_back(std::move(f));
  }
  return doc.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path.string());
  }
  out << body;
}

void write_point_csv(const std::filesystem::path& path,
                     const std::vector<WorldPoint>& pts, const std::string& prefix,
                     const std::string& crs_label) {
  std::vector<DetectionRecord> records;
  records.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    records.push_back({prefix + "-" + std::to_string(i + 1), pts[i], 1.0,
                       Epoch::Old, {}});
  }
  std::ostringstream body;
  write_detections(body, records, crs_label);
  write_text_file(path, body.str());
}

}  // namespace

void write_scenario(const std::filesystem::path& dir, const Scenario& scenario,
                    const std::string& crs_label) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "scenario.json", scenario_spec_to_json(scenario.spec));
  write_text_file(dir / "roads.geojson",
                  roads_geojson(scenario.truth.roads, crs_label));
  {
    std::ostringstream body;
    write_detections(body, scenario.old_detections, crs_label);
    write_text_file(dir / "detections_old.csv", body.str());
  }
  {
    std::ostringstream body;
    write_detections(body, scenario.new_detections, crs_label);
    write_text_file(dir / "detections_new.csv", body.str());
  }
  write_point_csv(dir / "gt_old.csv", scenario.truth.gt_old, "GT", crs_label);
  write_point_csv(dir / "gt_new.csv", scenario.truth.gt_new, "GT", crs_label);
  write_point_csv(dir / "expected_new.csv", scenario.truth.expected_new_changes,
                  "EXP", crs_label);
  write_point_csv(dir / "expected_removed.csv",
                  scenario.truth.expected_removed_changes, "EXP", crs_label);
}

OracleChangeSets oracle_changes(std::span<const DetectionRecord> old_pts,
                                std::span<const DetectionRecord> new_pts,
                                double change_radius_ft) {
  OracleChangeSets out;
  for (std::size_t i = 0; i < new_pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const DetectionRecord& o : old_pts) {
      best = std::min(best, dist_pp(new_pts[i].pos, o.pos));
    }
    if (best > change_radius_ft + kDistanceTolFt) out.new_indices.push_back(i);
  }
  for (std::size_t i = 0; i < old_pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const DetectionRecord& n : new_pts) {
      best = std::min(best, dist_pp(old_pts[i].pos, n.pos));
    }
    if (best > change_radius_ft + kDistanceTolFt) {
      out.removed_indices.push_back(i);
    }
  }
  return out;
}

MatchCounts oracle_match(std::span<const WorldPoint> gt,
                         std::span<const WorldPoint> model,
                         double eval_radius_ft) {
  MatchCounts c;
  c.gt_count = static_cast<std::int64_t>(gt.size());
  c.model_count = static_cast<std::int64_t>(model.size());
  for (const WorldPoint& g : gt) {
    bool hit = false;
    for (const WorldPoint& m : model) {
      if (dist_pp(g, m) <= eval_radius_ft + kDistanceTolFt) {
        hit = true;
        break;
      }
    }
    if (!hit) ++c.fn;
  }
  for (const WorldPoint& m : model) {
    bool hit = false;
    for (const WorldPoint& g : gt) {
      if (dist_pp(m, g) <= eval_radius_ft + kDistanceTolFt) {
        hit = true;
        break;
      }
    }
    if (!hit) ++c.fp;
  }
  c.tp = c.gt_count - c.fn;
  return c;
}

}  // namespace xwalk
