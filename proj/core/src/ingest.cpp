#include "xwalk/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "xwalk/error.hpp"

namespace xwalk {

std::string_view epoch_name(Epoch e) {
  return e == Epoch::Old ? "OLD" : "NEW";
}

std::string_view road_system_name(RoadSystem s) {
  return s == RoadSystem::On ? "ON" : "OFF";
}

std::vector<Polyline> RoadNetwork::centerlines(
    std::optional<RoadSystem> system) const {
  std::vector<Polyline> out;
  for (const RoadPolyline& rp : polylines) {
    if (!system || rp.system == *system) out.push_back(rp.line);
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      std::string f = line.substr(start, i - start);
      if (!f.empty() && f.back() == '\r') f.pop_back();
      fields.push_back(std::move(f));
      start = i + 1;
    }
  }
  return fields;
}

double parse_double(const std::string& field, const std::string& source,
                    long row, const std::string& column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw row_error(source, row,
                    "non-numeric value '" + field + "' in column " + column);
  }
  return value;
}

std::int64_t parse_int(const std::string& field, const std::string& source,
                       long row, const std::string& column) {
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw row_error(source, row,
                    "non-integer value '" + field + "' in column " + column);
  }
  return value;
}

// Reads "# key=value" comment lines preceding the header; returns the header
// fields. Recognized metadata: crs.
std::vector<std::string> read_header(std::istream& in, const std::string& source,
                                     std::optional<std::string>& crs_label) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string meta = trim(line.substr(1));
      if (meta.rfind("crs=", 0) == 0) crs_label = trim(meta.substr(4));
      continue;
    }
    std::vector<std::string> header = split_csv(line);
    for (std::string& h : header) h = trim(h);
    return header;
  }
  throw ValidationError(source + ": missing header row");
}

int column_of(const std::vector<std::string>& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

double scale_confidence(double raw, ConfidenceScale scale,
                        const std::string& source, long row) {
  const double c = scale == ConfidenceScale::Percent ? raw / 100.0 : raw;
  if (!(c >= 0.0 && c <= 1.0)) {
    throw row_error(source, row,
                    "confidence " + std::to_string(raw) + " outside " +
                        (scale == ConfidenceScale::Percent ? "[0, 100]"
                                                           : "[0, 1]"));
  }
  return c;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

ParsedDetections parse_detections(std::istream& in, Epoch epoch,
                                  const DetectionParseOptions& opts,
                                  const std::string& source) {
  ParsedDetections out;
  std::vector<std::string> header = read_header(in, source, out.crs_label);

  static const std::set<std::string> known = {"x",  "y",  "px",     "py",
                                              "id", "tile_id", "confidence"};
  for (const std::string& h : header) {
    if (!known.count(h)) {
      throw ValidationError(source + ": unknown column '" + h + "'");
    }
  }
  {
    std::set<std::string> uniq(header.begin(), header.end());
    if (uniq.size() != header.size()) {
      throw ValidationError(source + ": repeated column in header");
    }
  }

  const int col_x = column_of(header, "x");
  const int col_y = column_of(header, "y");
  const int col_px = column_of(header, "px");
  const int col_py = column_of(header, "py");
  const int col_conf = column_of(header, "confidence");
  const int col_id = column_of(header, "id");
  const int col_tile = column_of(header, "tile_id");

  const bool pixel_mode = col_px >= 0 || col_py >= 0;
  if (pixel_mode && (col_x >= 0 || col_y >= 0)) {
    throw ValidationError(source + ": header mixes x,y with px,py");
  }
  if (pixel_mode) {
    if (col_px < 0 || col_py < 0 || col_tile < 0) {
      throw ValidationError(source +
                            ": pixel mode requires columns tile_id,px,py");
    }
    if (opts.tiles == nullptr) {
      throw ValidationError(source +
                            ": pixel-mode CSV needs tile metadata (--tiles)");
    }
  } else if (col_x < 0 || col_y < 0) {
    throw ValidationError(source + ": missing required column " +
                          (col_x < 0 ? "'x'" : "'y'"));
  }
  if (col_conf < 0) {
    throw ValidationError(source + ": missing required column 'confidence'");
  }

  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw row_error(source, row,
                      "expected " + std::to_string(header.size()) +
                          " fields, got " + std::to_string(fields.size()));
    }

    DetectionRecord rec;
    rec.epoch = epoch;
    if (pixel_mode) {
      const std::string& tid = fields[col_tile];
      const auto it = opts.tiles->find(tid);
      if (it == opts.tiles->end()) {
        throw row_error(source, row, "unknown tile_id '" + tid + "'");
      }
      const double px = parse_double(fields[col_px], source, row, "px");
      const double py = parse_double(fields[col_py], source, row, "py");
      try {
        rec.pos = pixel_to_world(it->second, px, py);
      } catch (const ValidationError& e) {
        throw row_error(source, row, e.what());
      }
      rec.tile_id = tid;
    } else {
      rec.pos.x = parse_double(fields[col_x], source, row, "x");
      rec.pos.y = parse_double(fields[col_y], source, row, "y");
      if (!(std::isfinite(rec.pos.x) && std::isfinite(rec.pos.y))) {
        throw row_error(source, row, "non-finite coordinate");
      }
      if (col_tile >= 0 && !fields[col_tile].empty()) {
        rec.tile_id = fields[col_tile];
      }
    }
    rec.confidence = scale_confidence(
        parse_double(fields[col_conf], source, row, "confidence"),
        opts.confidence_scale, source, row);
    if (col_id >= 0 && !fields[col_id].empty()) {
      rec.id = fields[col_id];
    } else {
      rec.id = std::string(epoch_name(epoch)) + "-" + std::to_string(row);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

namespace {

using nlohmann::json;

std::optional<std::string> json_crs_label(const json& doc) {
  if (!doc.contains("crs")) return std::nullopt;
  const json& crs = doc["crs"];
  if (crs.is_string()) return crs.get<std::string>();
  if (crs.is_object() && crs.contains("properties") &&
      crs["properties"].contains("name") && crs["properties"]["name"].is_string()) {
    return crs["properties"]["name"].get<std::string>();
  }
  return std::nullopt;
}

std::vector<WorldPoint> coords_to_vertices(const json& coords,
                                           const std::string& source,
                                           long feature) {
  if (!coords.is_array() || coords.size() < 2) {
    throw feature_error(source, feature, "line needs at least 2 vertices");
  }
  std::vector<WorldPoint> vertices;
  vertices.reserve(coords.size());
  for (const json& c : coords) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
      throw feature_error(source, feature, "malformed coordinate pair");
    }
    vertices.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  return vertices;
}

}  // namespace

ParsedRoads parse_roads(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw ValidationError(source + ": expected a GeoJSON FeatureCollection");
  }

  ParsedRoads out;
  out.crs_label = json_crs_label(doc);
  std::int64_t next_id = 0;

  const json& features = doc["features"];
  for (long fi = 0; fi < static_cast<long>(features.size()); ++fi) {
    const json& f = features[fi];
    if (!f.is_object() || f.value("type", "") != "Feature" ||
        !f.contains("geometry") || !f["geometry"].is_object()) {
      throw feature_error(source, fi, "not a Feature with geometry");
    }
    const json& props = f.contains("properties") && f["properties"].is_object()
                            ? f["properties"]
                            : json::object();
    if (!props.contains("system") || !props["system"].is_string()) {
      throw feature_error(source, fi, "missing 'system' property");
    }
    const std::string system_str = props["system"].get<std::string>();
    RoadSystem system;
    if (system_str == "ON") {
      system = RoadSystem::On;
    } else if (system_str == "OFF") {
      system = RoadSystem::Off;
    } else {
      throw feature_error(source, fi,
                          "system must be ON or OFF, got '" + system_str + "'");
    }
    std::optional<std::string> name;
    if (props.contains("name") && props["name"].is_string()) {
      name = props["name"].get<std::string>();
    }

    const json& geom = f["geometry"];
    const std::string gtype = geom.value("type", "");
    std::vector<std::vector<WorldPoint>> parts;
    if (gtype == "LineString") {
      parts.push_back(coords_to_vertices(geom["coordinates"], source, fi));
    } else if (gtype == "MultiLineString") {
      if (!geom.contains("coordinates") || !geom["coordinates"].is_array() ||
          geom["coordinates"].empty()) {
        throw feature_error(source, fi, "empty MultiLineString");
      }
      for (const json& part : geom["coordinates"]) {
        parts.push_back(coords_to_vertices(part, source, fi));
      }
    } else {
      throw feature_error(
          source, fi, "geometry must be LineString or MultiLineString, got '" +
                          gtype + "'");
    }

    for (auto& vertices : parts) {
      try {
        out.network.polylines.push_back(
            {Polyline(next_id, std::move(vertices)), system, name});
      } catch (const ValidationError& e) {
        throw feature_error(source, fi, e.what());
      }
      ++next_id;
    }
  }
  return out;
}

ParsedTiles parse_tiles(std::istream& in, const std::string& source) {
  ParsedTiles out;
  std::vector<std::string> header = read_header(in, source, out.crs_label);
  static const std::vector<std::string> required = {
      "tile_id", "x_min", "y_max", "resolution", "width_px", "height_px"};
  for (const std::string& col : required) {
    if (column_of(header, col) < 0) {
      throw ValidationError(source + ": missing required column '" + col + "'");
    }
  }
  for (const std::string& h : header) {
    if (std::find(required.begin(), required.end(), h) == required.end()) {
      throw ValidationError(source + ": unknown column '" + h + "'");
    }
  }
  const int col_id = column_of(header, "tile_id");
  const int col_x = column_of(header, "x_min");
  const int col_y = column_of(header, "y_max");
  const int col_res = column_of(header, "resolution");
  const int col_w = column_of(header, "width_px");
  const int col_h = column_of(header, "height_px");

  std::unordered_set<std::string> seen_ids;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw row_error(source, row,
                      "expected " + std::to_string(header.size()) +
                          " fields, got " + std::to_string(fields.size()));
    }
    TileMeta t;
    t.tile_id = fields[col_id];
    if (t.tile_id.empty()) throw row_error(source, row, "empty tile_id");
    if (!seen_ids.insert(t.tile_id).second) {
      throw row_error(source, row, "duplicate tile_id '" + t.tile_id + "'");
    }
    t.corner.x = parse_double(fields[col_x], source, row, "x_min");
    t.corner.y = parse_double(fields[col_y], source, row, "y_max");
    t.resolution_ft_per_px = parse_double(fields[col_res], source, row, "resolution");
    t.width_px = parse_int(fields[col_w], source, row, "width_px");
    t.height_px = parse_int(fields[col_h], source, row, "height_px");
    if (!(t.resolution_ft_per_px > 0.0)) {
      throw row_error(source, row, "resolution must be > 0");
    }
    if (t.width_px < 1 || t.height_px < 1) {
      throw row_error(source, row, "pixel dimensions must be >= 1");
    }
    out.tiles.push_back(std::move(t));
  }
  return out;
}

WorldPoint pixel_to_world(const TileMeta& tile, double px, double py) {
  if (!(px >= 0.0 && px <= static_cast<double>(tile.width_px)) ||
      !(py >= 0.0 && py <= static_cast<double>(tile.height_px))) {
    throw ValidationError("pixel (" + format_double(px) + ", " +
                          format_double(py) + ") outside tile '" + tile.tile_id +
                          "' bounds");
  }
  return {tile.corner.x + px * tile.resolution_ft_per_px,
          tile.corner.y - py * tile.resolution_ft_per_px};
}

std::vector<TileMeta> select_tiles(std::span<const TileMeta> tiles,
                                   const RoadNetwork& roads) {
  // Per-polyline bounding boxes let us skip most rect/segment tests.
  struct Bound {
    Rect box;
    const Polyline* line;
  };
  std::vector<Bound> bounds;
  bounds.reserve(roads.polylines.size());
  for (const RoadPolyline& rp : roads.polylines) {
    const auto& v = rp.line.vertices();
    Rect box{v[0].x, v[0].y, v[0].x, v[0].y};
    for (const WorldPoint& p : v) {
      box.x_min = std::min(box.x_min, p.x);
      box.x_max = std::max(box.x_max, p.x);
      box.y_min = std::min(box.y_min, p.y);
      box.y_max = std::max(box.y_max, p.y);
    }
    bounds.push_back({box, &rp.line});
  }

  std::vector<TileMeta> selected;
  for (const TileMeta& t : tiles) {
    const Rect r = t.extent();
    for (const Bound& b : bounds) {
      if (b.box.x_max < r.x_min || b.box.x_min > r.x_max ||
          b.box.y_max < r.y_min || b.box.y_min > r.y_max) {
        continue;
      }
      if (rect_intersects_polyline(r, *b.line)) {
        selected.push_back(t);
        break;
      }
    }
  }
  return selected;
}

std::vector<ReviewAnnotation> parse_review(std::istream& in,
                                           const std::string& source) {
  std::optional<std::string> crs_ignored;
  std::vector<std::string> header = read_header(in, source, crs_ignored);
  if (header.size() < 2 || header[0] != "change_id" || header[1] != "label" ||
      (header.size() == 3 && header[2] != "note") || header.size() > 3) {
    throw ValidationError(source + ": expected header change_id,label[,note]");
  }

  std::vector<ReviewAnnotation> out;
  std::unordered_set<std::string> seen;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 2) {
      throw row_error(source, row, "expected change_id,label[,note]");
    }
    ReviewAnnotation a;
    a.change_id = fields[0];
    if (a.change_id.empty()) throw row_error(source, row, "empty change_id");
    if (!seen.insert(a.change_id).second) {
      throw row_error(source, row, "duplicate change_id '" + a.change_id + "'");
    }
    const std::string& label = fields[1];
    if (label == "NEW") {
      a.label = ReviewLabel::New;
    } else if (label == "MODIFIED") {
      a.label = ReviewLabel::Modified;
    } else if (label == "FALSE-POSITIVE") {
      a.label = ReviewLabel::FalsePositive;
    } else {
      throw row_error(source, row, "unknown label '" + label + "'");
    }
    if (fields.size() > 2) {
      // Unquoted notes may contain commas; everything past the label is note.
      std::string note = fields[2];
      for (std::size_t i = 3; i < fields.size(); ++i) note += "," + fields[i];
      if (!note.empty()) a.note = std::move(note);
    }
    out.push_back(std::move(a));
  }
  return out;
}

void write_detections(std::ostream& out, std::span<const DetectionRecord> records,
                      const std::optional<std::string>& crs_label) {
  if (crs_label) out << "# crs=" << *crs_label << "\n";
  bool any_tile = false;
  for (const DetectionRecord& r : records) {
    if (r.tile_id) {
      any_tile = true;
      break;
    }
  }
  out << (any_tile ? "x,y,confidence,id,tile_id" : "x,y,confidence,id") << "\n";
  for (const DetectionRecord& r : records) {
    out << format_double(r.pos.x) << ',' << format_double(r.pos.y) << ','
        << format_double(r.confidence) << ',' << r.id;
    if (any_tile) out << ',' << (r.tile_id ? *r.tile_id : "");
    out << "\n";
  }
}

}  // namespace xwalk
