#include "xwalk/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "xwalk/error.hpp"
#include "xwalk/log.hpp"
#include "xwalk/spatial_index.hpp"

namespace xwalk {

bool change_id_less(const std::string& a, const std::string& b) {
  const auto split = [](const std::string& s) {
    std::size_t i = s.size();
    while (i > 0 && s[i - 1] >= '0' && s[i - 1] <= '9') --i;
    return i;
  };
  const std::size_t pa = split(a), pb = split(b);
  if (pa == pb && a.compare(0, pa, b, 0, pb) == 0 && pa < a.size() &&
      pb < b.size()) {
    const std::string_view na(a.data() + pa, a.size() - pa);
    const std::string_view nb(b.data() + pb, b.size() - pb);
    if (na.size() != nb.size()) return na.size() < nb.size();
    return na < nb;
  }
  return a < b;
}

std::vector<ChangeRecord> dedup(std::span<const ChangeRecord> points,
                                double dedup_radius_ft) {
  if (!(dedup_radius_ft > 0.0)) {
    throw ValidationError("dedup: radius must be > 0");
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const ChangeRecord& a = points[i];
    const ChangeRecord& b = points[j];
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.pos.x != b.pos.x) return a.pos.x < b.pos.x;
    if (a.pos.y != b.pos.y) return a.pos.y < b.pos.y;
    return change_id_less(a.change_id, b.change_id);
  });

  // Kept points bucketed on a grid; the cell size strictly exceeds the
  // closed-ball radius so the 3x3 neighborhood is sufficient.
  const double cell = dedup_radius_ft + 1.0;
  const auto cell_of = [&](const WorldPoint& p) {
    return std::pair<std::int64_t, std::int64_t>(
        static_cast<std::int64_t>(std::floor(p.x / cell)),
        static_cast<std::int64_t>(std::floor(p.y / cell)));
  };
  const auto key = [](std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
  };
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;

  std::vector<ChangeRecord> kept;
  for (const std::size_t i : order) {
    const auto [cx, cy] = cell_of(points[i].pos);
    bool suppressed = false;
    for (std::int64_t dx = -1; dx <= 1 && !suppressed; ++dx) {
      for (std::int64_t dy = -1; dy <= 1 && !suppressed; ++dy) {
        const auto it = grid.find(key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (const std::size_t k : it->second) {
          if (within_radius(dist_pp(points[i].pos, kept[k].pos),
                            dedup_radius_ft)) {
            suppressed = true;
            break;
          }
        }
      }
    }
    if (!suppressed) {
      grid[key(cx, cy)].push_back(kept.size());
      kept.push_back(points[i]);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const ChangeRecord& a, const ChangeRecord& b) {
    return change_id_less(a.change_id, b.change_id);
  });
  return kept;
}

namespace {

struct JunctionEvent {
  WorldPoint pos;
  std::int64_t line_a, line_b;
};

// Union-find over event indices.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<IntersectionPoint> derive_intersections(const RoadNetwork& roads,
                                                    double snap_tol_ft) {
  if (!(snap_tol_ft > 0.0)) {
    throw ValidationError("derive_intersections: snap tolerance must be > 0");
  }

  struct SegRef {
    std::int64_t line_id;
    WorldPoint a, b;
  };
  std::vector<SegRef> segs;
  for (const RoadPolyline& rp : roads.polylines) {
    const auto& v = rp.line.vertices();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      segs.push_back({rp.line.id(), v[i], v[i + 1]});
    }
  }

  // Candidate pairs come from a coarse grid over segment bboxes.
  double cell = 0.0;
  for (const SegRef& s : segs) cell += dist_pp(s.a, s.b);
  cell = segs.empty() ? 1.0 : std::max(cell / static_cast<double>(segs.size()), 1.0);

  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
  const auto key = [](std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
  };
  for (std::uint32_t i = 0; i < segs.size(); ++i) {
    const SegRef& s = segs[i];
    const auto cx0 = static_cast<std::int64_t>(std::floor(std::min(s.a.x, s.b.x) / cell));
    const auto cx1 = static_cast<std::int64_t>(std::floor(std::max(s.a.x, s.b.x) / cell));
    const auto cy0 = static_cast<std::int64_t>(std::floor(std::min(s.a.y, s.b.y) / cell));
    const auto cy1 = static_cast<std::int64_t>(std::floor(std::max(s.a.y, s.b.y) / cell));
    for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
      for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
        grid[key(cx, cy)].push_back(i);
      }
    }
  }

  std::vector<JunctionEvent> events;
  std::size_t overlap_count = 0;
  std::unordered_set<std::uint64_t> tested;
  for (const auto& [k, bucket] : grid) {
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      for (std::size_t j = i + 1; j < bucket.size(); ++j) {
        std::uint32_t si = bucket[i], sj = bucket[j];
        if (segs[si].line_id == segs[sj].line_id) continue;
        if (si > sj) std::swap(si, sj);
        if (!tested.insert((static_cast<std::uint64_t>(si) << 32) | sj).second) {
          continue;
        }
        const SegmentIntersection hit =
            segment_intersect(segs[si].a, segs[si].b, segs[sj].a, segs[sj].b);
        if (hit.collinear_overlap) {
          ++overlap_count;
        } else if (hit.point) {
          events.push_back({*hit.point,
                            std::min(segs[si].line_id, segs[sj].line_id),
                            std::max(segs[si].line_id, segs[sj].line_id)});
        }
      }
    }
  }
  if (overlap_count > 0) {
    log_warn("derive_intersections: " + std::to_string(overlap_count) +
             " collinear-overlap segment pair(s) ignored (likely data defects)");
  }

  // Endpoint touches: a polyline end within snap_tol of another polyline.
  {
    const std::vector<Polyline> lines = roads.centerlines();
    const SegmentIndex index(lines);
    for (const RoadPolyline& rp : roads.polylines) {
      const auto& v = rp.line.vertices();
      for (const WorldPoint& end : {v.front(), v.back()}) {
        for (const SegmentHit& h : index.query_within(end, snap_tol_ft)) {
          if (h.polyline_id == rp.line.id()) continue;
          events.push_back({end, std::min(rp.line.id(), h.polyline_id),
                            std::max(rp.line.id(), h.polyline_id)});
        }
      }
    }
  }

  if (events.empty()) return {};

  // Cluster events within snap_tol (transitive) via a snap-sized grid.
  std::sort(events.begin(), events.end(),
            [](const JunctionEvent& a, const JunctionEvent& b) {
              return std::tie(a.pos.x, a.pos.y, a.line_a, a.line_b) <
                     std::tie(b.pos.x, b.pos.y, b.line_a, b.line_b);
            });

  DisjointSet ds(events.size());
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> snap_grid;
  for (std::uint32_t i = 0; i < events.size(); ++i) {
    const auto cx = static_cast<std::int64_t>(std::floor(events[i].pos.x / snap_tol_ft));
    const auto cy = static_cast<std::int64_t>(std::floor(events[i].pos.y / snap_tol_ft));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = snap_grid.find(key(cx + dx, cy + dy));
        if (it == snap_grid.end()) continue;
        for (const std::uint32_t j : it->second) {
          if (dist_pp(events[i].pos, events[j].pos) <= snap_tol_ft) {
            ds.unite(i, j);
          }
        }
      }
    }
    snap_grid[key(cx, cy)].push_back(i);
  }

  struct Cluster {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    std::set<std::int64_t> lines;
  };
  std::unordered_map<std::size_t, Cluster> clusters;
  for (std::size_t i = 0; i < events.size(); ++i) {
    Cluster& c = clusters[ds.find(i)];
    c.sx += events[i].pos.x;
    c.sy += events[i].pos.y;
    c.n += 1;
    c.lines.insert(events[i].line_a);
    c.lines.insert(events[i].line_b);
  }

  std::vector<IntersectionPoint> out;
  out.reserve(clusters.size());
  for (const auto& [root, c] : clusters) {
    out.push_back({{c.sx / static_cast<double>(c.n), c.sy / static_cast<double>(c.n)},
                   static_cast<int>(c.lines.size())});
  }
  std::sort(out.begin(), out.end(),
            [](const IntersectionPoint& a, const IntersectionPoint& b) {
              return std::tie(a.pos.x, a.pos.y) < std::tie(b.pos.x, b.pos.y);
            });
  return out;
}

std::vector<IntersectionPoint> parse_intersections_csv(std::istream& in,
                                                       const std::string& source) {
  std::string header;
  while (std::getline(in, header)) {
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header.empty() || header[0] == '#') continue;
    break;
  }
  if (header != "x,y") {
    throw ValidationError(source + ": expected header x,y");
  }
  std::vector<IntersectionPoint> out;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw row_error(source, row, "expected x,y");
    }
    try {
      std::size_t used_x = 0, used_y = 0;
      const std::string xs = line.substr(0, comma);
      const std::string ys = line.substr(comma + 1);
      const double x = std::stod(xs, &used_x);
      const double y = std::stod(ys, &used_y);
      if (used_x != xs.size() || used_y != ys.size()) {
        throw std::invalid_argument("trailing characters");
      }
      out.push_back({{x, y}, 2});
    } catch (const std::exception&) {
      throw row_error(source, row, "non-numeric coordinate");
    }
  }
  return out;
}

FpFilterResult fp_filter(std::span<const ChangeRecord> changes,
                         std::span<const IntersectionPoint> intersections,
                         double confidence_floor, double intersection_radius_ft) {
  std::vector<std::pair<std::int64_t, WorldPoint>> entries;
  entries.reserve(intersections.size());
  for (std::size_t i = 0; i < intersections.size(); ++i) {
    entries.emplace_back(static_cast<std::int64_t>(i), intersections[i].pos);
  }
  const PointIndex index(entries);

  FpFilterResult result;
  for (const ChangeRecord& c : changes) {
    const auto nearest = index.query_nearest(c.pos);
    const double d = nearest ? nearest->distance_ft
                             : std::numeric_limits<double>::infinity();
    const bool low_confidence = c.confidence < confidence_floor;
    const bool far_from_intersection = !within_radius(d, intersection_radius_ft);
    if (low_confidence && far_from_intersection) {
      ChangeRecord fp = c;
      fp.status = ChangeStatus::FalsePositive;
      result.discarded.push_back(std::move(fp));
    } else {
      result.retained.push_back(c);
    }
  }
  return result;
}

void apply_review(std::span<ChangeRecord> changes,
                  std::span<const ReviewAnnotation> annotations) {
  std::unordered_map<std::string, std::size_t> by_id;
  by_id.reserve(changes.size());
  for (std::size_t i = 0; i < changes.size(); ++i) {
    by_id.emplace(changes[i].change_id, i);
  }
  for (const ReviewAnnotation& a : annotations) {
    const auto it = by_id.find(a.change_id);
    if (it == by_id.end()) {
      throw ValidationError("review: unknown change_id '" + a.change_id + "'");
    }
    ChangeRecord& rec = changes[it->second];
    switch (a.label) {
      case ReviewLabel::New: rec.status = ChangeStatus::New; break;
      case ReviewLabel::Modified: rec.status = ChangeStatus::Modified; break;
      case ReviewLabel::FalsePositive:
        rec.status = ChangeStatus::FalsePositive;
        break;
    }
  }
}

}  // namespace xwalk
