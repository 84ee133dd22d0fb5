#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "xwalk/changedet.hpp"

namespace xwalk {

struct ChangeSummary {
  std::int64_t total_changes = 0;
  std::int64_t on_system = 0;
  std::int64_t off_system = 0;
  std::int64_t n_candidate = 0;
  std::int64_t n_new = 0;
  std::int64_t n_modified = 0;
  std::int64_t n_false_positive = 0;
  std::pair<std::string, std::string> epochs = {"OLD", "NEW"};
  Thresholds thresholds;
};

ChangeSummary summarize(std::span<const ChangeRecord> changes,
                        const Thresholds& thresholds,
                        const std::pair<std::string, std::string>& epochs);

// GeoJSON FeatureCollection of Points, features sorted by change_id
// (natural order), numeric properties and coordinates fixed at 3 decimals
// so output is byte-stable. An infinite nearest-distance serializes as null.
std::string export_geojson(std::span<const ChangeRecord> changes,
                           const std::optional<std::string>& crs_label = std::nullopt);

struct ParsedChanges {
  std::vector<ChangeRecord> records;
  std::optional<std::string> crs_label;
};

ParsedChanges import_geojson(std::istream& in,
                             const std::string& source = "changes");

// CSV twin of the GeoJSON export: change_id,x,y,kind,status,system,
// confidence,nearest_other_epoch_dist_ft
std::string export_changes_csv(std::span<const ChangeRecord> changes);

// Same schema plus discard_reason.
std::string export_discarded_csv(std::span<const ChangeRecord> discarded);

// 64-bit FNV-1a content digests for the run manifest.
std::uint64_t fnv1a64(std::string_view bytes);
std::string file_digest_hex(const std::filesystem::path& path);

struct RunManifest {
  std::string tool_version;
  Thresholds thresholds;
  std::string confidence_scale = "fraction";
  std::string matching_mode = "rules-as-stated";
  std::optional<std::string> crs_label;
  std::optional<std::uint64_t> seed;
  // (input name, path, digest), in a fixed order.
  std::vector<std::tuple<std::string, std::string, std::string>> inputs;
};

std::string export_summary(const ChangeSummary& summary,
                           const RunManifest& manifest);

}  // namespace xwalk
