#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xwalk/evalmetrics.hpp"
#include "xwalk/geometry.hpp"
#include "xwalk/ingest.hpp"

namespace xwalk {

// Deterministic synthetic county: a jittered road grid (plus optional
// diagonals), ground-truth crosswalks at derived junctions, planted changes
// on mid-block positions, and detector-style noise (jitter, drops,
// duplicates, low-confidence clutter). Everything derives from `seed`.
struct ScenarioSpec {
  std::uint64_t seed = 1;
  Rect extent{0.0, 0.0, 5000.0, 5000.0};
  double grid_spacing_ft = 500.0;
  int road_count = 10;
  int diagonal_count = 0;
  int crosswalks_per_intersection = 1;
  int planted_new = 0;
  int planted_removed = 0;
  double jitter_sigma_ft = 0.0;
  double drop_rate = 0.0;
  double duplicate_rate = 0.0;
  double clutter_rate = 0.0;
  std::pair<double, double> clutter_confidence_range{0.40, 0.49};
  std::pair<double, double> true_confidence_range{0.60, 0.95};

  void validate() const;
};

struct ScenarioTruth {
  RoadNetwork roads;
  std::vector<WorldPoint> gt_old;
  std::vector<WorldPoint> gt_new;
  std::vector<WorldPoint> expected_new_changes;
  std::vector<WorldPoint> expected_removed_changes;
  // Clutter present in each epoch's detections; constructed to satisfy both
  // false-positive discard conditions.
  std::vector<WorldPoint> clutter_old;
  std::vector<WorldPoint> clutter_new;
};

struct Scenario {
  ScenarioSpec spec;
  ScenarioTruth truth;
  std::vector<DetectionRecord> old_detections;
  std::vector<DetectionRecord> new_detections;
};

// Planted changes are separated from all other-epoch truth by at least
// kPlantSeparationFt (twice the default change radius), padded by the
// truncated 3-sigma jitter bound, so recovery is exact for sigma <= 5.
inline constexpr double kPlantSeparationFt = 72.0;
inline constexpr double kPlacementPadFt = 15.0;

Scenario gen_scenario(const ScenarioSpec& spec);

// JSON (de)serialization of the spec; unknown keys reject.
ScenarioSpec scenario_spec_from_json(std::istream& in,
                                     const std::string& source = "scenario");
std::string scenario_spec_to_json(const ScenarioSpec& spec);

// Emits the scenario in the same formats the parsers consume:
// roads.geojson, detections_old.csv, detections_new.csv, gt_old.csv,
// gt_new.csv, expected_new.csv, expected_removed.csv, scenario.json.
void write_scenario(const std::filesystem::path& dir, const Scenario& scenario,
                    const std::string& crs_label);

// O(n^2) reference implementations used to cross-check the indexed paths.
// Results are index sets into the corresponding input spans.
struct OracleChangeSets {
  std::vector<std::size_t> new_indices;      // into new_pts
  std::vector<std::size_t> removed_indices;  // into old_pts
};

OracleChangeSets oracle_changes(std::span<const DetectionRecord> old_pts,
                                std::span<const DetectionRecord> new_pts,
                                double change_radius_ft);

MatchCounts oracle_match(std::span<const WorldPoint> gt,
                         std::span<const WorldPoint> model, double eval_radius_ft);

}  // namespace xwalk
