#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xwalk/geometry.hpp"

namespace xwalk {

struct IdDistance {
  std::int64_t id = 0;
  double distance_ft = 0.0;

  friend bool operator==(const IdDistance&, const IdDistance&) = default;
};

// Uniform-grid index over points. Query results are exactly the brute-force
// result set: distances come from the same dist_pp and ties break on the
// smallest id, so answers do not depend on build order.
class PointIndex {
 public:
  PointIndex() = default;
  explicit PointIndex(std::span<const std::pair<std::int64_t, WorldPoint>> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // All entries with dist_pp(entry, center) <= radius, sorted by id.
  std::vector<IdDistance> query_within(const WorldPoint& center,
                                       double radius_ft) const;

  // Globally nearest entry; absent on an empty index.
  std::optional<IdDistance> query_nearest(const WorldPoint& center) const;

 private:
  struct Entry {
    std::int64_t id;
    WorldPoint pos;
  };

  std::int64_t cell_x(double x) const;
  std::int64_t cell_y(double y) const;

  std::vector<Entry> entries_;  // sorted by id
  double cell_size_ = 1.0;
  double origin_x_ = 0.0, origin_y_ = 0.0;
  std::int64_t cx_min_ = 0, cx_max_ = -1, cy_min_ = 0, cy_max_ = -1;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

struct SegmentHit {
  std::int64_t polyline_id = 0;
  std::uint32_t segment_ordinal = 0;
  double distance_ft = 0.0;
};

// Grid index over polyline segments keyed by (polyline id, segment ordinal).
// Same exactness contract as PointIndex; nearest ties break on the smallest
// polyline id.
class SegmentIndex {
 public:
  SegmentIndex() = default;
  explicit SegmentIndex(std::span<const Polyline> polylines);

  bool empty() const { return segs_.empty(); }
  std::size_t segment_count() const { return segs_.size(); }

  // Nearest polyline over all segments. Rejects an empty index.
  std::pair<std::int64_t, double> query_segment_distance(const WorldPoint& p) const;

  // All segments within radius (one hit per segment), sorted by
  // (polyline id, ordinal). Used by intersection derivation.
  std::vector<SegmentHit> query_within(const WorldPoint& p, double radius_ft) const;

 private:
  struct Seg {
    std::int64_t polyline_id;
    std::uint32_t ordinal;
    WorldPoint a, b;
  };

  std::int64_t cell_x(double x) const;
  std::int64_t cell_y(double y) const;
  void collect_cell(std::int64_t cx, std::int64_t cy,
                    std::vector<std::uint32_t>& out) const;

  std::vector<Seg> segs_;
  double cell_size_ = 1.0;
  double origin_x_ = 0.0, origin_y_ = 0.0;
  std::int64_t cx_min_ = 0, cx_max_ = -1, cy_min_ = 0, cy_max_ = -1;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace xwalk
