#include "xwalk/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "xwalk/error.hpp"
#include "xwalk/ingest.hpp"
#include "xwalk/log.hpp"
#include "xwalk/postprocess.hpp"
#include "xwalk/version.hpp"

namespace xwalk {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open input file: " + path.string());
  }
  return in;
}

void write_output(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write output file: " + path.string());
  }
  out << body;
}

// All CRS labels present across config and inputs must agree.
void check_crs(const std::optional<std::string>& expected,
               const std::optional<std::string>& found,
               const std::string& source, std::optional<std::string>& current,
               std::string& current_source) {
  if (expected && found && *expected != *found) {
    throw ValidationError("CRS mismatch: config declares '" + *expected +
                          "' but " + source + " declares '" + *found + "'");
  }
  if (!found) return;
  if (current && *current != *found) {
    throw ValidationError("CRS mismatch: " + current_source + " declares '" +
                          *current + "' but " + source + " declares '" + *found +
                          "'");
  }
  if (!current) {
    current = found;
    current_source = source;
  }
}

}  // namespace

RunConfig run_config_from_json(std::istream& in, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError(source + ": expected a JSON object");
  }

  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "paths") {
      for (const auto& [pkey, pvalue] : value.items()) {
        if (pvalue.is_null()) continue;
        const std::string p = pvalue.get<std::string>();
        if (pkey == "old") {
          cfg.old_detections = p;
        } else if (pkey == "new") {
          cfg.new_detections = p;
        } else if (pkey == "roads") {
          cfg.roads = p;
        } else if (pkey == "tiles") {
          cfg.tiles = p;
        } else if (pkey == "review") {
          cfg.review = p;
        } else if (pkey == "intersections") {
          cfg.intersections = p;
        } else if (pkey == "out") {
          cfg.out_dir = p;
        } else {
          throw ValidationError(source + ": unknown paths key '" + pkey + "'");
        }
      }
    } else if (key == "thresholds") {
      for (const auto& [tkey, tvalue] : value.items()) {
        const double v = tvalue.get<double>();
        if (tkey == "mask_radius_ft") {
          cfg.thresholds.mask_radius_ft = v;
        } else if (tkey == "change_radius_ft") {
          cfg.thresholds.change_radius_ft = v;
        } else if (tkey == "dedup_radius_ft") {
          cfg.thresholds.dedup_radius_ft = v;
        } else if (tkey == "eval_radius_ft") {
          cfg.thresholds.eval_radius_ft = v;
        } else if (tkey == "intersection_radius_ft") {
          cfg.thresholds.intersection_radius_ft = v;
        } else if (tkey == "confidence_floor") {
          cfg.thresholds.confidence_floor = v;
        } else {
          throw ValidationError(source + ": unknown thresholds key '" + tkey + "'");
        }
      }
    } else if (key == "confidence_scale") {
      const std::string v = value.get<std::string>();
      if (v == "fraction") {
        cfg.confidence_scale = ConfidenceScale::Fraction;
      } else if (v == "percent") {
        cfg.confidence_scale = ConfidenceScale::Percent;
      } else {
        throw ValidationError(source + ": confidence_scale must be fraction|percent");
      }
    } else if (key == "matching_mode") {
      const std::string v = value.get<std::string>();
      if (v == "rules-as-stated") {
        cfg.matching_mode = MatchingMode::RulesAsStated;
      } else if (v == "one-to-one") {
        cfg.matching_mode = MatchingMode::OneToOne;
      } else {
        throw ValidationError(source +
                              ": matching_mode must be rules-as-stated|one-to-one");
      }
    } else if (key == "crs_label") {
      if (!value.is_null()) cfg.crs_label = value.get<std::string>();
    } else if (key == "epoch_labels") {
      cfg.old_epoch_label = value.value("old", cfg.old_epoch_label);
      cfg.new_epoch_label = value.value("new", cfg.new_epoch_label);
    } else if (key == "jobs") {
      cfg.jobs = value.get<int>();
    } else {
      throw ValidationError(source + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

PipelineResult run_pipeline(const RunConfig& config) {
  config.thresholds.validate();
  if (config.jobs < 1) {
    throw ValidationError("config: jobs must be >= 1");
  }
  if (config.old_detections.empty() || config.new_detections.empty() ||
      config.roads.empty()) {
    throw ValidationError("config: old, new, and roads paths are required");
  }

  const auto t_start = Clock::now();
  std::optional<std::string> crs;
  std::string crs_source = "config";
  if (config.crs_label) crs = config.crs_label;

  // Ingest.
  auto t = Clock::now();
  ParsedRoads roads = [&] {
    std::ifstream in = open_input(config.roads);
    return parse_roads(in, config.roads.filename().string());
  }();
  check_crs(config.crs_label, roads.crs_label, config.roads.filename().string(),
            crs, crs_source);

  std::map<std::string, TileMeta> tile_map;
  std::vector<TileMeta> tiles;
  if (config.tiles) {
    std::ifstream in = open_input(*config.tiles);
    ParsedTiles parsed = parse_tiles(in, config.tiles->filename().string());
    check_crs(config.crs_label, parsed.crs_label,
              config.tiles->filename().string(), crs, crs_source);
    tiles = std::move(parsed.tiles);
    for (const TileMeta& tm : tiles) tile_map.emplace(tm.tile_id, tm);
  }

  DetectionParseOptions det_opts;
  det_opts.confidence_scale = config.confidence_scale;
  det_opts.tiles = tile_map.empty() ? nullptr : &tile_map;

  ParsedDetections old_parsed = [&] {
    std::ifstream in = open_input(config.old_detections);
    return parse_detections(in, Epoch::Old, det_opts,
                            config.old_detections.filename().string());
  }();
  check_crs(config.crs_label, old_parsed.crs_label,
            config.old_detections.filename().string(), crs, crs_source);

  ParsedDetections new_parsed = [&] {
    std::ifstream in = open_input(config.new_detections);
    return parse_detections(in, Epoch::New, det_opts,
                            config.new_detections.filename().string());
  }();
  check_crs(config.crs_label, new_parsed.crs_label,
            config.new_detections.filename().string(), crs, crs_source);
  log_info("ingest: " + std::to_string(old_parsed.records.size()) + " old + " +
           std::to_string(new_parsed.records.size()) + " new detections, " +
           std::to_string(roads.network.polylines.size()) + " centerlines (" +
           std::to_string(ms_since(t)) + " ms)");

  // Tile selection: detections tagged with a tile that no centerline crosses
  // would never have been imaged in the masked mosaic; drop them.
  t = Clock::now();
  if (!tiles.empty()) {
    const std::vector<TileMeta> selected = select_tiles(tiles, roads.network);
    std::unordered_set<std::string> keep;
    for (const TileMeta& tm : selected) keep.insert(tm.tile_id);
    const auto drop_unselected = [&](std::vector<DetectionRecord>& records) {
      std::size_t dropped = 0;
      std::vector<DetectionRecord> out;
      out.reserve(records.size());
      for (DetectionRecord& r : records) {
        if (r.tile_id && !keep.count(*r.tile_id)) {
          ++dropped;
        } else {
          out.push_back(std::move(r));
        }
      }
      records = std::move(out);
      return dropped;
    };
    const std::size_t dropped = drop_unselected(old_parsed.records) +
                                drop_unselected(new_parsed.records);
    log_info("select_tiles: " + std::to_string(selected.size()) + "/" +
             std::to_string(tiles.size()) + " tiles kept, " +
             std::to_string(dropped) + " detections dropped (" +
             std::to_string(ms_since(t)) + " ms)");
  }

  // Masking, both epochs (concurrently when jobs allow).
  t = Clock::now();
  std::vector<DetectionRecord> old_masked, new_masked;
  if (config.jobs > 1) {
    auto fut = std::async(std::launch::async, [&] {
      return mask_filter(old_parsed.records, roads.network,
                         config.thresholds.mask_radius_ft);
    });
    new_masked = mask_filter(new_parsed.records, roads.network,
                             config.thresholds.mask_radius_ft);
    old_masked = fut.get();
  } else {
    old_masked = mask_filter(old_parsed.records, roads.network,
                             config.thresholds.mask_radius_ft);
    new_masked = mask_filter(new_parsed.records, roads.network,
                             config.thresholds.mask_radius_ft);
  }
  log_info("mask: kept " + std::to_string(old_masked.size()) + " old, " +
           std::to_string(new_masked.size()) + " new (" +
           std::to_string(ms_since(t)) + " ms)");

  // Change detection, both directions.
  t = Clock::now();
  std::vector<ChangeRecord> new_candidates, removed_candidates;
  if (config.jobs > 1) {
    auto fut = std::async(std::launch::async, [&] {
      return detect_new(new_masked, old_masked, config.thresholds.change_radius_ft);
    });
    removed_candidates =
        detect_removed(old_masked, new_masked, config.thresholds.change_radius_ft);
    new_candidates = fut.get();
  } else {
    new_candidates =
        detect_new(new_masked, old_masked, config.thresholds.change_radius_ft);
    removed_candidates =
        detect_removed(old_masked, new_masked, config.thresholds.change_radius_ft);
  }
  std::vector<ChangeRecord> candidates = std::move(new_candidates);
  candidates.insert(candidates.end(),
                    std::make_move_iterator(removed_candidates.begin()),
                    std::make_move_iterator(removed_candidates.end()));
  number_changes(candidates);
  set_epoch_labels(candidates, config.old_epoch_label, config.new_epoch_label);
  log_info("changes: " + std::to_string(candidates.size()) + " candidates (" +
           std::to_string(ms_since(t)) + " ms)");

  // Dedup per kind; candidates of opposite kinds are at least the change
  // radius apart by construction, but contrived thresholds could cross them.
  t = Clock::now();
  {
    std::vector<ChangeRecord> new_side, removed_side;
    for (ChangeRecord& c : candidates) {
      (c.kind == ChangeKind::NewCandidate ? new_side : removed_side)
          .push_back(std::move(c));
    }
    std::vector<ChangeRecord> new_kept =
        dedup(new_side, config.thresholds.dedup_radius_ft);
    std::vector<ChangeRecord> removed_kept =
        dedup(removed_side, config.thresholds.dedup_radius_ft);
    candidates = std::move(new_kept);
    candidates.insert(candidates.end(),
                      std::make_move_iterator(removed_kept.begin()),
                      std::make_move_iterator(removed_kept.end()));
  }
  log_info("dedup: " + std::to_string(candidates.size()) + " kept (" +
           std::to_string(ms_since(t)) + " ms)");

  // Intersections: supplied layer wins over derivation.
  t = Clock::now();
  std::vector<IntersectionPoint> intersections;
  if (config.intersections) {
    std::ifstream in = open_input(*config.intersections);
    intersections =
        parse_intersections_csv(in, config.intersections->filename().string());
  } else {
    intersections = derive_intersections(roads.network);
  }
  log_info("intersections: " + std::to_string(intersections.size()) + " (" +
           std::to_string(ms_since(t)) + " ms)");

  t = Clock::now();
  FpFilterResult filtered =
      fp_filter(candidates, intersections, config.thresholds.confidence_floor,
                config.thresholds.intersection_radius_ft);
  split_by_system(filtered.retained, roads.network,
                  config.thresholds.mask_radius_ft);
  split_by_system(filtered.discarded, roads.network,
                  config.thresholds.mask_radius_ft);
  log_info("fp_filter: " + std::to_string(filtered.retained.size()) +
           " retained, " + std::to_string(filtered.discarded.size()) +
           " discarded (" + std::to_string(ms_since(t)) + " ms)");

  if (config.review) {
    std::ifstream in = open_input(*config.review);
    const std::vector<ReviewAnnotation> annotations =
        parse_review(in, config.review->filename().string());
    apply_review(filtered.retained, annotations);
    log_info("review: " + std::to_string(annotations.size()) + " labels applied");
  }

  // Summary + exports.
  t = Clock::now();
  PipelineResult result;
  result.retained = std::move(filtered.retained);
  result.discarded = std::move(filtered.discarded);
  result.summary =
      summarize(result.retained, config.thresholds,
                {config.old_epoch_label, config.new_epoch_label});

  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.thresholds = config.thresholds;
  manifest.confidence_scale =
      config.confidence_scale == ConfidenceScale::Fraction ? "fraction" : "percent";
  manifest.matching_mode = std::string(matching_mode_name(config.matching_mode));
  manifest.crs_label = crs;
  manifest.inputs.emplace_back("old_detections", config.old_detections.string(),
                               file_digest_hex(config.old_detections));
  manifest.inputs.emplace_back("new_detections", config.new_detections.string(),
                               file_digest_hex(config.new_detections));
  manifest.inputs.emplace_back("roads", config.roads.string(),
                               file_digest_hex(config.roads));
  if (config.tiles) {
    manifest.inputs.emplace_back("tiles", config.tiles->string(),
                                 file_digest_hex(*config.tiles));
  }
  if (config.review) {
    manifest.inputs.emplace_back("review", config.review->string(),
                                 file_digest_hex(*config.review));
  }
  if (config.intersections) {
    manifest.inputs.emplace_back("intersections", config.intersections->string(),
                                 file_digest_hex(*config.intersections));
  }

  std::filesystem::create_directories(config.out_dir);
  const auto emit = [&](const char* name, const std::string& body) {
    const std::filesystem::path path = config.out_dir / name;
    write_output(path, body);
    result.outputs.push_back(path);
  };
  emit("changes.geojson", export_geojson(result.retained, crs));
  emit("changes.csv", export_changes_csv(result.retained));
  emit("discarded_fp.csv", export_discarded_csv(result.discarded));
  emit("summary.json", export_summary(result.summary, manifest));
  log_info("exports: " + std::to_string(result.outputs.size()) + " files (" +
           std::to_string(ms_since(t)) + " ms)");
  log_info("pipeline: done in " + std::to_string(ms_since(t_start)) + " ms");
  return result;
}

}  // namespace xwalk
