#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xwalk/geometry.hpp"
#include "xwalk/ingest.hpp"

namespace xwalk {

// Every distance rule in the pipeline, with the framework's defaults.
// "Within" is a closed ball throughout (within_radius in geometry.hpp).
struct Thresholds {
  double mask_radius_ft = 100.0;          // road-buffer masking
  double change_radius_ft = 36.0;         // inverse-selection suppression
  double dedup_radius_ft = 24.0;          // duplicate-removal NMS
  double eval_radius_ft = 30.0;           // GT matching
  double intersection_radius_ft = 90.0;   // false-positive distance condition
  double confidence_floor = 0.5;          // false-positive confidence condition

  void validate() const;  // throws ValidationError
};

enum class ChangeKind { NewCandidate, RemovedCandidate };
enum class ChangeStatus { Candidate, New, Modified, FalsePositive };

std::string_view change_kind_name(ChangeKind k);      // NEW-CANDIDATE / REMOVED-CANDIDATE
std::string_view change_status_name(ChangeStatus s);  // CANDIDATE / NEW / MODIFIED / FALSE-POSITIVE

struct ChangeRecord {
  std::string change_id;
  WorldPoint pos;
  ChangeKind kind = ChangeKind::NewCandidate;
  double confidence = 0.0;
  RoadSystem system = RoadSystem::Off;
  ChangeStatus status = ChangeStatus::Candidate;
  // Distance to the nearest detection of the other epoch; infinity when that
  // epoch is empty.
  double nearest_other_epoch_dist_ft = std::numeric_limits<double>::infinity();
  std::pair<std::string, std::string> source_epoch_labels = {"OLD", "NEW"};

  friend bool operator==(const ChangeRecord&, const ChangeRecord&) = default;
};

// Detections within mask_radius of any centerline, input order preserved.
// Rejects an empty road network.
std::vector<DetectionRecord> mask_filter(std::span<const DetectionRecord> points,
                                         const RoadNetwork& roads,
                                         double mask_radius_ft);

// Inverse selection: new-epoch detections with no old-epoch detection within
// change_radius become NEW-CANDIDATEs, in input order. change_ids are left
// empty; assign them with number_changes once both directions are merged.
std::vector<ChangeRecord> detect_new(std::span<const DetectionRecord> new_pts,
                                     std::span<const DetectionRecord> old_pts,
                                     double change_radius_ft);

// Symmetric direction: old-epoch detections absent from the new epoch.
std::vector<ChangeRecord> detect_removed(std::span<const DetectionRecord> old_pts,
                                         std::span<const DetectionRecord> new_pts,
                                         double change_radius_ft);

// Assigns sequential ids C1..Cn in the records' current order.
void number_changes(std::span<ChangeRecord> changes);

void set_epoch_labels(std::span<ChangeRecord> changes, const std::string& old_label,
                      const std::string& new_label);

// system = ON iff within mask_radius of an ON centerline; no ON roads means
// everything is OFF.
void split_by_system(std::span<ChangeRecord> changes, const RoadNetwork& roads,
                     double mask_radius_ft);

}  // namespace xwalk
