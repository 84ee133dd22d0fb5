#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xwalk/geometry.hpp"

namespace xwalk {

enum class Epoch { Old, New };

std::string_view epoch_name(Epoch e);  // "OLD" / "NEW"

struct DetectionRecord {
  std::string id;        // from the id column, else "<EPOCH>-<row>"
  WorldPoint pos;        // ft
  double confidence = 0.0;  // canonical fraction in [0, 1]
  Epoch epoch = Epoch::Old;
  std::optional<std::string> tile_id;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

// Georeferencing anchor of one aerial tile: `corner` is the world position
// of the top-left pixel edge; rows grow southward (north-up imagery).
struct TileMeta {
  std::string tile_id;
  WorldPoint corner;            // (x_min, y_max)
  double resolution_ft_per_px = 0.0;
  std::int64_t width_px = 0;
  std::int64_t height_px = 0;

  Rect extent() const {
    return Rect{corner.x, corner.y - height_px * resolution_ft_per_px,
                corner.x + width_px * resolution_ft_per_px, corner.y};
  }
};

enum class RoadSystem { On, Off };  // state highway system vs local

std::string_view road_system_name(RoadSystem s);  // "ON" / "OFF"

struct RoadPolyline {
  Polyline line;
  RoadSystem system = RoadSystem::Off;
  std::optional<std::string> name;
};

struct RoadNetwork {
  std::vector<RoadPolyline> polylines;

  bool empty() const { return polylines.empty(); }
  // Centerlines, optionally restricted to one system.
  std::vector<Polyline> centerlines(
      std::optional<RoadSystem> system = std::nullopt) const;
};

enum class ReviewLabel { New, Modified, FalsePositive };

struct ReviewAnnotation {
  std::string change_id;
  ReviewLabel label = ReviewLabel::New;
  std::optional<std::string> note;
};

enum class ConfidenceScale { Fraction, Percent };

struct DetectionParseOptions {
  ConfidenceScale confidence_scale = ConfidenceScale::Fraction;
  // Required for pixel-mode CSVs (tile_id,px,py,confidence[,id]).
  const std::map<std::string, TileMeta>* tiles = nullptr;
};

struct ParsedDetections {
  std::vector<DetectionRecord> records;
  std::optional<std::string> crs_label;
};

// Strict CSV parser. Accepted headers (any column order, no extras):
//   x,y,confidence[,id][,tile_id]      world-coordinate mode
//   tile_id,px,py,confidence[,id]      pixel mode, resolved via tile metadata
// A `# crs=<label>` comment line before the header declares the CRS.
// Every rejection names the offending row.
ParsedDetections parse_detections(std::istream& in, Epoch epoch,
                                  const DetectionParseOptions& opts = {},
                                  const std::string& source = "detections");

struct ParsedRoads {
  RoadNetwork network;
  std::optional<std::string> crs_label;
};

// GeoJSON FeatureCollection of LineString/MultiLineString features with a
// `system` property ("ON"/"OFF"). MultiLineStrings split into one polyline
// per part sharing the feature's attributes.
ParsedRoads parse_roads(std::istream& in, const std::string& source = "roads");

struct ParsedTiles {
  std::vector<TileMeta> tiles;
  std::optional<std::string> crs_label;
};

// CSV: tile_id,x_min,y_max,resolution,width_px,height_px
ParsedTiles parse_tiles(std::istream& in, const std::string& source = "tiles");

// (px, py) in [0, width_px] x [0, height_px]; out-of-range rejects.
WorldPoint pixel_to_world(const TileMeta& tile, double px, double py);

// Tiles whose footprint crosses at least one centerline (closed rectangles).
std::vector<TileMeta> select_tiles(std::span<const TileMeta> tiles,
                                   const RoadNetwork& roads);

// CSV: change_id,label[,note]; labels NEW | MODIFIED | FALSE-POSITIVE.
std::vector<ReviewAnnotation> parse_review(std::istream& in,
                                           const std::string& source = "review");

// Serializer matching parse_detections' world-coordinate schema; coordinates
// round-trip exactly (shortest-round-trip formatting).
void write_detections(std::ostream& out, std::span<const DetectionRecord> records,
                      const std::optional<std::string>& crs_label = std::nullopt);

}  // namespace xwalk
