#include "xwalk/changedet.hpp"

#include <utility>

#include "xwalk/error.hpp"
#include "xwalk/spatial_index.hpp"

namespace xwalk {

void Thresholds::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) {
      throw ValidationError(std::string("thresholds: ") + name +
                            " must be > 0");
    }
  };
  positive(mask_radius_ft, "mask_radius_ft");
  positive(change_radius_ft, "change_radius_ft");
  positive(dedup_radius_ft, "dedup_radius_ft");
  positive(eval_radius_ft, "eval_radius_ft");
  positive(intersection_radius_ft, "intersection_radius_ft");
  if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0)) {
    throw ValidationError("thresholds: confidence_floor must be in [0, 1]");
  }
}

std::string_view change_kind_name(ChangeKind k) {
  return k == ChangeKind::NewCandidate ? "NEW-CANDIDATE" : "REMOVED-CANDIDATE";
}

std::string_view change_status_name(ChangeStatus s) {
  switch (s) {
    case ChangeStatus::Candidate: return "CANDIDATE";
    case ChangeStatus::New: return "NEW";
    case ChangeStatus::Modified: return "MODIFIED";
    case ChangeStatus::FalsePositive: return "FALSE-POSITIVE";
  }
  return "?";
}

std::vector<DetectionRecord> mask_filter(std::span<const DetectionRecord> points,
                                         const RoadNetwork& roads,
                                         double mask_radius_ft) {
  if (roads.empty()) {
    throw ValidationError("mask_filter: empty road network");
  }
  const std::vector<Polyline> lines = roads.centerlines();
  const SegmentIndex index(lines);
  std::vector<DetectionRecord> kept;
  kept.reserve(points.size());
  for (const DetectionRecord& p : points) {
    const auto [id, d] = index.query_segment_distance(p.pos);
    if (within_radius(d, mask_radius_ft)) kept.push_back(p);
  }
  return kept;
}

namespace {

std::vector<ChangeRecord> detect_direction(
    std::span<const DetectionRecord> candidates,
    std::span<const DetectionRecord> other_epoch, double change_radius_ft,
    ChangeKind kind) {
  std::vector<std::pair<std::int64_t, WorldPoint>> entries;
  entries.reserve(other_epoch.size());
  for (std::size_t i = 0; i < other_epoch.size(); ++i) {
    entries.emplace_back(static_cast<std::int64_t>(i), other_epoch[i].pos);
  }
  const PointIndex index(entries);

  std::vector<ChangeRecord> out;
  for (const DetectionRecord& p : candidates) {
    const auto nearest = index.query_nearest(p.pos);
    const double d = nearest ? nearest->distance_ft
                             : std::numeric_limits<double>::infinity();
    if (within_radius(d, change_radius_ft)) continue;  // disregarded
    ChangeRecord rec;
    rec.pos = p.pos;
    rec.kind = kind;
    rec.confidence = p.confidence;
    rec.nearest_other_epoch_dist_ft = d;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<ChangeRecord> detect_new(std::span<const DetectionRecord> new_pts,
                                     std::span<const DetectionRecord> old_pts,
                                     double change_radius_ft) {
  return detect_direction(new_pts, old_pts, change_radius_ft,
                          ChangeKind::NewCandidate);
}

std::vector<ChangeRecord> detect_removed(std::span<const DetectionRecord> old_pts,
                                         std::span<const DetectionRecord> new_pts,
                                         double change_radius_ft) {
  return detect_direction(old_pts, new_pts, change_radius_ft,
                          ChangeKind::RemovedCandidate);
}

void number_changes(std::span<ChangeRecord> changes) {
  for (std::size_t i = 0; i < changes.size(); ++i) {
    changes[i].change_id = "C" + std::to_string(i + 1);
  }
}

void set_epoch_labels(std::span<ChangeRecord> changes, const std::string& old_label,
                      const std::string& new_label) {
  for (ChangeRecord& c : changes) {
    c.source_epoch_labels = {old_label, new_label};
  }
}

void split_by_system(std::span<ChangeRecord> changes, const RoadNetwork& roads,
                     double mask_radius_ft) {
  const std::vector<Polyline> on_lines = roads.centerlines(RoadSystem::On);
  if (on_lines.empty()) {
    for (ChangeRecord& c : changes) c.system = RoadSystem::Off;
    return;
  }
  const SegmentIndex index(on_lines);
  for (ChangeRecord& c : changes) {
    const auto [id, d] = index.query_segment_distance(c.pos);
    c.system = within_radius(d, mask_radius_ft) ? RoadSystem::On : RoadSystem::Off;
  }
}

}  // namespace xwalk
