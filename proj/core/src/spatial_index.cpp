#include "xwalk/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "xwalk/error.hpp"

namespace xwalk {
namespace {

std::uint64_t cell_key(std::int64_t cx, std::int64_t cy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
}

}  // namespace

PointIndex::PointIndex(
    std::span<const std::pair<std::int64_t, WorldPoint>> entries) {
  entries_.reserve(entries.size());
  for (const auto& [id, pos] : entries) entries_.push_back({id, pos});
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  for (std::size_t i = 0; i + 1 < entries_.size(); ++i) {
    if (entries_[i].id == entries_[i + 1].id) {
      throw ValidationError("point index: duplicate id " +
                            std::to_string(entries_[i].id));
    }
  }
  if (entries_.empty()) return;

  double x_min = entries_[0].pos.x, x_max = x_min;
  double y_min = entries_[0].pos.y, y_max = y_min;
  for (const Entry& e : entries_) {
    x_min = std::min(x_min, e.pos.x);
    x_max = std::max(x_max, e.pos.x);
    y_min = std::min(y_min, e.pos.y);
    y_max = std::max(y_max, e.pos.y);
  }
  origin_x_ = x_min;
  origin_y_ = y_min;
  const double area = (x_max - x_min) * (y_max - y_min);
  cell_size_ = std::max(std::sqrt(area / static_cast<double>(entries_.size())),
                        1e-3);

  cx_min_ = cell_x(x_min);
  cx_max_ = cell_x(x_max);
  cy_min_ = cell_y(y_min);
  cy_max_ = cell_y(y_max);
  for (std::uint32_t i = 0; i < entries_.size(); ++i) {
    cells_[cell_key(cell_x(entries_[i].pos.x), cell_y(entries_[i].pos.y))]
        .push_back(i);
  }
}

std::int64_t PointIndex::cell_x(double x) const {
  return static_cast<std::int64_t>(std::floor((x - origin_x_) / cell_size_));
}
std::int64_t PointIndex::cell_y(double y) const {
  return static_cast<std::int64_t>(std::floor((y - origin_y_) / cell_size_));
}

std::vector<IdDistance> PointIndex::query_within(const WorldPoint& center,
                                                 double radius_ft) const {
  std::vector<IdDistance> out;
  if (entries_.empty() || radius_ft < 0.0) return out;
  const std::int64_t cx0 = std::max(cx_min_, cell_x(center.x - radius_ft));
  const std::int64_t cx1 = std::min(cx_max_, cell_x(center.x + radius_ft));
  const std::int64_t cy0 = std::max(cy_min_, cell_y(center.y - radius_ft));
  const std::int64_t cy1 = std::min(cy_max_, cell_y(center.y + radius_ft));
  for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
    for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
      const auto it = cells_.find(cell_key(cx, cy));
      if (it == cells_.end()) continue;
      for (const std::uint32_t i : it->second) {
        const double d = dist_pp(entries_[i].pos, center);
        if (d <= radius_ft) out.push_back({entries_[i].id, d});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const IdDistance& a, const IdDistance& b) { return a.id < b.id; });
  return out;
}

std::optional<IdDistance> PointIndex::query_nearest(const WorldPoint& center) const {
  if (entries_.empty()) return std::nullopt;

  const std::int64_t qx = cell_x(center.x);
  const std::int64_t qy = cell_y(center.y);
  // Start at the ring that first touches the occupied cell range.
  std::int64_t ring = std::max<std::int64_t>(
      0, std::max(std::max(cx_min_ - qx, qx - cx_max_),
                  std::max(cy_min_ - qy, qy - cy_max_)));

  bool found = false;
  IdDistance best{std::numeric_limits<std::int64_t>::max(),
                  std::numeric_limits<double>::infinity()};
  const auto consider = [&](std::int64_t cx, std::int64_t cy) {
    const auto it = cells_.find(cell_key(cx, cy));
    if (it == cells_.end()) return;
    for (const std::uint32_t i : it->second) {
      const double d = dist_pp(entries_[i].pos, center);
      if (d < best.distance_ft ||
          (d == best.distance_ft && entries_[i].id < best.id)) {
        best = {entries_[i].id, d};
        found = true;
      }
    }
  };

  for (;; ++ring) {
    // Conservative lower bound on the distance to anything in this ring.
    const double lower = static_cast<double>(ring - 1) * cell_size_;
    if (found && lower > best.distance_ft) break;
    if (qx - ring > cx_max_ || qx + ring < cx_min_ || qy - ring > cy_max_ ||
        qy + ring < cy_min_) {
      if (found) break;
      continue;  // not yet reached the occupied range (start ring handles this)
    }
    const std::int64_t x0 = qx - ring, x1 = qx + ring;
    const std::int64_t y0 = qy - ring, y1 = qy + ring;
    if (ring == 0) {
      consider(qx, qy);
    } else {
      for (std::int64_t cx = x0; cx <= x1; ++cx) {
        consider(cx, y0);
        consider(cx, y1);
      }
      for (std::int64_t cy = y0 + 1; cy < y1; ++cy) {
        consider(x0, cy);
        consider(x1, cy);
      }
    }
  }
  return best;
}

SegmentIndex::SegmentIndex(std::span<const Polyline> polylines) {
  double total_len = 0.0;
  for (const Polyline& pl : polylines) {
    const auto& v = pl.vertices();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      segs_.push_back({pl.id(), static_cast<std::uint32_t>(i), v[i], v[i + 1]});
      total_len += dist_pp(v[i], v[i + 1]);
    }
  }
  if (segs_.empty()) return;

  std::sort(segs_.begin(), segs_.end(), [](const Seg& a, const Seg& b) {
    return std::pair(a.polyline_id, a.ordinal) < std::pair(b.polyline_id, b.ordinal);
  });

  double x_min = segs_[0].a.x, x_max = x_min;
  double y_min = segs_[0].a.y, y_max = y_min;
  for (const Seg& s : segs_) {
    x_min = std::min({x_min, s.a.x, s.b.x});
    x_max = std::max({x_max, s.a.x, s.b.x});
    y_min = std::min({y_min, s.a.y, s.b.y});
    y_max = std::max({y_max, s.a.y, s.b.y});
  }
  origin_x_ = x_min;
  origin_y_ = y_min;
  cell_size_ = std::max(total_len / static_cast<double>(segs_.size()), 1.0);
  cx_min_ = cell_x(x_min);
  cx_max_ = cell_x(x_max);
  cy_min_ = cell_y(y_min);
  cy_max_ = cell_y(y_max);

  for (std::uint32_t i = 0; i < segs_.size(); ++i) {
    const Seg& s = segs_[i];
    const std::int64_t cx0 = cell_x(std::min(s.a.x, s.b.x));
    const std::int64_t cx1 = cell_x(std::max(s.a.x, s.b.x));
    const std::int64_t cy0 = cell_y(std::min(s.a.y, s.b.y));
    const std::int64_t cy1 = cell_y(std::max(s.a.y, s.b.y));
    for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
      for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
        cells_[cell_key(cx, cy)].push_back(i);
      }
    }
  }
}

std::int64_t SegmentIndex::cell_x(double x) const {
  return static_cast<std::int64_t>(std::floor((x - origin_x_) / cell_size_));
}
std::int64_t SegmentIndex::cell_y(double y) const {
  return static_cast<std::int64_t>(std::floor((y - origin_y_) / cell_size_));
}

void SegmentIndex::collect_cell(std::int64_t cx, std::int64_t cy,
                                std::vector<std::uint32_t>& out) const {
  const auto it = cells_.find(cell_key(cx, cy));
  if (it == cells_.end()) return;
  out.insert(out.end(), it->second.begin(), it->second.end());
}

std::pair<std::int64_t, double> SegmentIndex::query_segment_distance(
    const WorldPoint& p) const {
  if (segs_.empty()) {
    throw ValidationError("segment index: query on empty index");
  }

  const std::int64_t qx = cell_x(p.x);
  const std::int64_t qy = cell_y(p.y);
  std::int64_t ring = std::max<std::int64_t>(
      0, std::max(std::max(cx_min_ - qx, qx - cx_max_),
                  std::max(cy_min_ - qy, qy - cy_max_)));

  bool found = false;
  std::int64_t best_id = 0;
  double best_d = std::numeric_limits<double>::infinity();
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> bucket;

  const auto consider_ring = [&](std::int64_t r) {
    bucket.clear();
    const std::int64_t x0 = qx - r, x1 = qx + r;
    const std::int64_t y0 = qy - r, y1 = qy + r;
    if (r == 0) {
      collect_cell(qx, qy, bucket);
    } else {
      for (std::int64_t cx = x0; cx <= x1; ++cx) {
        collect_cell(cx, y0, bucket);
        collect_cell(cx, y1, bucket);
      }
      for (std::int64_t cy = y0 + 1; cy < y1; ++cy) {
        collect_cell(x0, cy, bucket);
        collect_cell(x1, cy, bucket);
      }
    }
    for (const std::uint32_t i : bucket) {
      if (!seen.insert(i).second) continue;
      const Seg& s = segs_[i];
      const double d = dist_point_segment(p, s.a, s.b);
      if (d < best_d || (d == best_d && s.polyline_id < best_id)) {
        best_d = d;
        best_id = s.polyline_id;
        found = true;
      }
    }
  };

  for (;; ++ring) {
    const double lower = static_cast<double>(ring - 1) * cell_size_;
    if (found && lower > best_d) break;
    if (qx - ring > cx_max_ || qx + ring < cx_min_ || qy - ring > cy_max_ ||
        qy + ring < cy_min_) {
      if (found) break;
      continue;
    }
    consider_ring(ring);
  }
  return {best_id, best_d};
}

std::vector<SegmentHit> SegmentIndex::query_within(const WorldPoint& p,
                                                   double radius_ft) const {
  std::vector<SegmentHit> out;
  if (segs_.empty() || radius_ft < 0.0) return out;
  const std::int64_t cx0 = std::max(cx_min_, cell_x(p.x - radius_ft));
  const std::int64_t cx1 = std::min(cx_max_, cell_x(p.x + radius_ft));
  const std::int64_t cy0 = std::max(cy_min_, cell_y(p.y - radius_ft));
  const std::int64_t cy1 = std::min(cy_max_, cell_y(p.y + radius_ft));
  std::unordered_set<std::uint32_t> seen;
  for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
    for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
      const auto it = cells_.find(cell_key(cx, cy));
      if (it == cells_.end()) continue;
      for (const std::uint32_t i : it->second) {
        if (!seen.insert(i).second) continue;
        const Seg& s = segs_[i];
        const double d = dist_point_segment(p, s.a, s.b);
        if (d <= radius_ft) out.push_back({s.polyline_id, s.ordinal, d});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const SegmentHit& a, const SegmentHit& b) {
    return std::pair(a.polyline_id, a.segment_ordinal) <
           std::pair(b.polyline_id, b.segment_ordinal);
  });
  return out;
}

}  // namespace xwalk
