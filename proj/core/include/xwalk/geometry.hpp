#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace xwalk {

// All geometry is planar, in one projected CRS measured in US survey feet.
// Distance comparisons against thresholds use an absolute tolerance of
// kDistanceTolFt so that points sitting exactly on a boundary land on the
// documented side (closed-ball "within" semantics).
inline constexpr double kDistanceTolFt = 1e-6;

struct WorldPoint {
  double x = 0.0;  // east, ft
  double y = 0.0;  // north, ft

  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool valid() const { return x_min <= x_max && y_min <= y_max; }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(const WorldPoint& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Open polygonal chain. At least two vertices, consecutive vertices more
// than kDistanceTolFt apart; the constructor enforces both.
class Polyline {
 public:
  Polyline(std::int64_t id, std::vector<WorldPoint> vertices);

  std::int64_t id() const { return id_; }
  const std::vector<WorldPoint>& vertices() const { return vertices_; }
  std::size_t segment_count() const { return vertices_.size() - 1; }

 private:
  std::int64_t id_ = 0;
  std::vector<WorldPoint> vertices_;
};

// Closed-ball "within"; one convention shared by every threshold rule.
inline bool within_radius(double distance_ft, double radius_ft) {
  return distance_ft <= radius_ft + kDistanceTolFt;
}

double dist_pp(const WorldPoint& a, const WorldPoint& b);

// Distance to the closed segment ab. Degenerate segments (a == b within
// kDistanceTolFt) are rejected.
double dist_point_segment(const WorldPoint& p, const WorldPoint& a,
                          const WorldPoint& b);

double dist_point_polyline(const WorldPoint& p, const Polyline& line);

struct SegmentIntersection {
  // Set when the closed segments meet in exactly one point (proper crossing
  // or endpoint touch). Collinear positive-length overlaps give no point and
  // raise the flag instead: overlapping digitized centerlines are data
  // defects, not junctions.
  std::optional<WorldPoint> point;
  bool collinear_overlap = false;
};

SegmentIntersection segment_intersect(const WorldPoint& a1, const WorldPoint& a2,
                                      const WorldPoint& b1, const WorldPoint& b2);

// True iff any segment of the polyline meets the closed rectangle,
// including segments fully inside and segments running along an edge.
bool rect_intersects_polyline(const Rect& r, const Polyline& line);

// Closed ring approximating the radius-offset of the polyline with round
// caps and joins. Arcs are discretized so each chord spans strictly less
// than arc_step degrees; every emitted vertex lies at distance radius from
// the polyline (up to fp noise) except inner miter vertices, which lie at
// >= radius. The ring does not repeat its first vertex.
std::vector<WorldPoint> buffer_ring(const Polyline& line, double radius_ft,
                                    double arc_step_deg);

}  // namespace xwalk
