#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xwalk/changedet.hpp"
#include "xwalk/evalmetrics.hpp"
#include "xwalk/report.hpp"

namespace xwalk {

struct RunConfig {
  std::filesystem::path old_detections;
  std::filesystem::path new_detections;
  std::filesystem::path roads;
  std::optional<std::filesystem::path> tiles;
  std::optional<std::filesystem::path> review;
  std::optional<std::filesystem::path> intersections;  // CSV override, x,y
  std::filesystem::path out_dir = "out";

  Thresholds thresholds;
  ConfidenceScale confidence_scale = ConfidenceScale::Fraction;
  MatchingMode matching_mode = MatchingMode::RulesAsStated;
  std::optional<std::string> crs_label;
  std::string old_epoch_label = "OLD";
  std::string new_epoch_label = "NEW";
  int jobs = 1;
};

// Loads a JSON config; unknown keys reject. Flags layered on top by the CLI.
RunConfig run_config_from_json(std::istream& in,
                               const std::string& source = "config");

struct PipelineResult {
  std::vector<ChangeRecord> retained;
  std::vector<ChangeRecord> discarded;
  ChangeSummary summary;
  std::vector<std::filesystem::path> outputs;
};

// The full chain: ingest -> tile selection (if tiles given) -> masking ->
// inverse-selection change detection in both directions -> dedup ->
// intersection derivation -> false-positive filter -> system split ->
// review merge -> summary + exports. Outputs land in out_dir:
// changes.geojson, changes.csv, discarded_fp.csv, summary.json.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace xwalk
