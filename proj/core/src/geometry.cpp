#include "xwalk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "xwalk/error.hpp"

namespace xwalk {
namespace {

double cross(double ax, double ay, double bx, double by) {
  return ax * by - ay * bx;
}

// Near-parallel cutoff on unit-direction cross products; below this the
// inner-miter solve is ill-conditioned and the join degenerates to a point.
constexpr double kTurnEps = 1e-9;

}  // namespace

Polyline::Polyline(std::int64_t id, std::vector<WorldPoint> vertices)
    : id_(id), vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) {
    throw ValidationError("polyline " + std::to_string(id_) +
                          ": needs at least 2 vertices, got " +
                          std::to_string(vertices_.size()));
  }
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    if (!(std::isfinite(vertices_[i].x) && std::isfinite(vertices_[i].y))) {
      throw ValidationError("polyline " + std::to_string(id_) +
                            ": non-finite vertex " + std::to_string(i));
    }
    if (dist_pp(vertices_[i], vertices_[i + 1]) <= kDistanceTolFt) {
      throw ValidationError("polyline " + std::to_string(id_) +
                            ": coincident consecutive vertices at index " +
                            std::to_string(i));
    }
  }
  const WorldPoint& last = vertices_.back();
  if (!(std::isfinite(last.x) && std::isfinite(last.y))) {
    throw ValidationError("polyline " + std::to_string(id_) +
                          ": non-finite vertex " +
                          std::to_string(vertices_.size() - 1));
  }
}

double dist_pp(const WorldPoint& a, const WorldPoint& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

double dist_point_segment(const WorldPoint& p, const WorldPoint& a,
                          const WorldPoint& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 <= kDistanceTolFt * kDistanceTolFt) {
    throw ValidationError("dist_point_segment: degenerate segment");
  }
  double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double dist_point_polyline(const WorldPoint& p, const Polyline& line) {
  const auto& v = line.vertices();
  double best = dist_point_segment(p, v[0], v[1]);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    best = std::min(best, dist_point_segment(p, v[i], v[i + 1]));
  }
  return best;
}

SegmentIntersection segment_intersect(const WorldPoint& a1, const WorldPoint& a2,
                                      const WorldPoint& b1, const WorldPoint& b2) {
  SegmentIntersection result;

  const double d1x = a2.x - a1.x, d1y = a2.y - a1.y;
  const double d2x = b2.x - b1.x, d2y = b2.y - b1.y;
  const double wx = b1.x - a1.x, wy = b1.y - a1.y;
  const double len1 = std::hypot(d1x, d1y);
  const double len2 = std::hypot(d2x, d2y);
  if (len1 <= kDistanceTolFt || len2 <= kDistanceTolFt) {
    throw ValidationError("segment_intersect: degenerate segment");
  }

  const double denom = cross(d1x, d1y, d2x, d2y);
  if (std::abs(denom) > kTurnEps * len1 * len2) {
    const double t = cross(wx, wy, d2x, d2y) / denom;
    const double u = cross(wx, wy, d1x, d1y) / denom;
    const double t_tol = kDistanceTolFt / len1;
    const double u_tol = kDistanceTolFt / len2;
    if (t >= -t_tol && t <= 1.0 + t_tol && u >= -u_tol && u <= 1.0 + u_tol) {
      const double tc = std::clamp(t, 0.0, 1.0);
      result.point = WorldPoint{a1.x + tc * d1x, a1.y + tc * d1y};
    }
    return result;
  }

  // Parallel. Collinear iff b1 sits on the line through a1-a2.
  const double offline = std::abs(cross(wx, wy, d1x, d1y)) / len1;
  if (offline > kDistanceTolFt) return result;

  // Project both b endpoints onto a's axis (feet along the segment).
  const double ux = d1x / len1, uy = d1y / len1;
  double s1 = wx * ux + wy * uy;
  double s2 = (b2.x - a1.x) * ux + (b2.y - a1.y) * uy;
  if (s1 > s2) std::swap(s1, s2);
  const double lo = std::max(0.0, s1);
  const double hi = std::min(len1, s2);
  if (lo > hi + kDistanceTolFt) return result;  // disjoint
  if (hi - lo <= kDistanceTolFt) {
    const double s = 0.5 * (lo + hi);
    result.point = WorldPoint{a1.x + s * ux, a1.y + s * uy};
    return result;
  }
  result.collinear_overlap = true;
  return result;
}

namespace {

// Liang-Barsky clip of the closed segment against the closed rectangle.
bool segment_hits_rect(const Rect& r, const WorldPoint& a, const WorldPoint& b) {
  if (r.contains(a) || r.contains(b)) return true;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.x_min, r.x_max - a.x, a.y - r.y_min, r.y_max - a.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
    } else {
      const double t = q[k] / p[k];
      if (p[k] < 0.0) {
        t0 = std::max(t0, t);
      } else {
        t1 = std::min(t1, t);
      }
      if (t0 > t1) return false;
    }
  }
  return true;
}

}  // namespace

bool rect_intersects_polyline(const Rect& r, const Polyline& line) {
  if (!r.valid()) {
    throw ValidationError("rect_intersects_polyline: invalid rectangle");
  }
  const auto& v = line.vertices();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (segment_hits_rect(r, v[i], v[i + 1])) return true;
  }
  return false;
}

namespace {

class RingBuilder {
 public:
  void push(const WorldPoint& p) {
    if (!pts_.empty() && dist_pp(pts_.back(), p) <= 1e-9) return;
    pts_.push_back(p);
  }
  void pop() { pts_.pop_back(); }
  std::vector<WorldPoint> take() {
    if (pts_.size() > 1 && dist_pp(pts_.front(), pts_.back()) <= 1e-9) {
      pts_.pop_back();
    }
    return std::move(pts_);
  }

 private:
  std::vector<WorldPoint> pts_;
};

// CCW arc around c from angle `from` sweeping `sweep` radians; chords span
// strictly less than arc_step_deg each. Emits both endpoints.
void append_arc(RingBuilder& out, const WorldPoint& c, double from, double sweep,
                double radius, double arc_step_deg) {
  const double sweep_deg = sweep * 180.0 / std::numbers::pi;
  const int nseg = static_cast<int>(std::floor(sweep_deg / arc_step_deg)) + 1;
  for (int k = 0; k <= nseg; ++k) {
    const double ang = from + sweep * k / nseg;
    out.push({c.x + radius * std::cos(ang), c.y + radius * std::sin(ang)});
  }
}

// Offset walk along one side (right-hand of travel). Outer joins become
// arcs, inner joins the miter point of the two offset lines.
void side_pass(RingBuilder& out, std::span<const WorldPoint> v, double radius,
               double arc_step_deg) {
  const std::size_t nseg = v.size() - 1;
  double pdx = 0, pdy = 0;  // previous unit direction
  for (std::size_t i = 0; i < nseg; ++i) {
    const double len = dist_pp(v[i], v[i + 1]);
    const double dx = (v[i + 1].x - v[i].x) / len;
    const double dy = (v[i + 1].y - v[i].y) / len;
    const double nx = dy, ny = -dx;  // right normal
    if (i == 0) {
      out.push({v[0].x + nx * radius, v[0].y + ny * radius});
    } else {
      const double turn = cross(pdx, pdy, dx, dy);
      if (turn > kTurnEps) {
        // Left turn: right side is outer; round join around the vertex.
        const double pnx = pdy, pny = -pdx;
        const double from = std::atan2(pny, pnx);
        const double sweep = std::atan2(turn, pdx * dx + pdy * dy);
        append_arc(out, v[i], from, sweep, radius, arc_step_deg);
      } else if (turn < -kTurnEps) {
        // Right turn: inner side; intersect the two offset lines.
        const double pnx = pdy, pny = -pdx;
        const double ax = v[i - 1].x + pnx * radius, ay = v[i - 1].y + pny * radius;
        const double bx = v[i].x + nx * radius, by = v[i].y + ny * radius;
        const double denom = cross(pdx, pdy, dx, dy);
        const double t = cross(bx - ax, by - ay, dx, dy) / denom;
        out.pop();  // previous segment's end offset, replaced by the miter
        out.push({ax + t * pdx, ay + t * pdy});
      }
      // Straight continuation: the shared offset point is already emitted.
    }
    out.push({v[i + 1].x + nx * radius, v[i + 1].y + ny * radius});
    pdx = dx;
    pdy = dy;
  }
}

}  // namespace

std::vector<WorldPoint> buffer_ring(const Polyline& line, double radius_ft,
                                    double arc_step_deg) {
  if (!(radius_ft > 0.0)) {
    throw ValidationError("buffer_ring: radius must be > 0");
  }
  if (!(arc_step_deg >= 1.0 && arc_step_deg <= 90.0)) {
    throw ValidationError("buffer_ring: arc_step must be in [1, 90] degrees");
  }

  const auto& fwd = line.vertices();
  std::vector<WorldPoint> rev(fwd.rbegin(), fwd.rend());

  RingBuilder out;
  side_pass(out, fwd, radius_ft, arc_step_deg);

  // End cap: half circle from the forward right normal through the travel
  // direction to the reverse right normal.
  {
    const std::size_t n = fwd.size();
    const double len = dist_pp(fwd[n - 2], fwd[n - 1]);
    const double dx = (fwd[n - 1].x - fwd[n - 2].x) / len;
    const double dy = (fwd[n - 1].y - fwd[n - 2].y) / len;
    append_arc(out, fwd[n - 1], std::atan2(-dx, dy), std::numbers::pi, radius_ft,
               arc_step_deg);
  }

  side_pass(out, rev, radius_ft, arc_step_deg);

  {
    const double len = dist_pp(fwd[1], fwd[0]);
    const double dx = (fwd[0].x - fwd[1].x) / len;
    const double dy = (fwd[0].y - fwd[1].y) / len;
    append_arc(out, fwd[0], std::atan2(-dx, dy), std::numbers::pi, radius_ft,
               arc_step_deg);
  }

  return out.take();
}

}  // namespace xwalk
