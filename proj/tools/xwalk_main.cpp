#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xwalk/changedet.hpp"
#include "xwalk/error.hpp"
#include "xwalk/evalmetrics.hpp"
#include "xwalk/ingest.hpp"
#include "xwalk/log.hpp"
#include "xwalk/pipeline.hpp"
#include "xwalk/postprocess.hpp"
#include "xwalk/report.hpp"
#include "xwalk/synth.hpp"
#include "xwalk/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace xwalk;

constexpr const char* kSynthCrsLabel = "SYNTH-FT";

std::ifstream open_or_throw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file: " + path.string());
  return in;
}

void write_or_throw(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write output file: " + path.string());
  out << body;
}

ConfidenceScale scale_from_string(const std::string& v) {
  if (v == "fraction") return ConfidenceScale::Fraction;
  if (v == "percent") return ConfidenceScale::Percent;
  throw ValidationError("--confidence-scale must be fraction|percent");
}

MatchingMode mode_from_string(const std::string& v) {
  if (v == "rules-as-stated") return MatchingMode::RulesAsStated;
  if (v == "one-to-one") return MatchingMode::OneToOne;
  throw ValidationError("--matching-mode must be rules-as-stated|one-to-one");
}

// Shared option bundle; every flag remembers whether it was set so it can
// override values loaded from --config (flags win).
struct Flags {
  std::string config, old_path, new_path, roads, tiles, review, intersections;
  std::string out = "out";
  double mask_radius = 100.0, change_radius = 36.0, dedup_radius = 24.0;
  double eval_radius = 30.0, intersection_radius = 90.0, confidence_floor = 0.5;
  std::string confidence_scale = "fraction";
  std::string matching_mode = "rules-as-stated";
  std::uint64_t seed = 1;
  int jobs = 1;
};

void add_threshold_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--mask-radius", f.mask_radius, "Road-buffer mask radius (ft)");
  cmd->add_option("--change-radius", f.change_radius,
                  "Inverse-selection radius (ft)");
  cmd->add_option("--dedup-radius", f.dedup_radius, "Duplicate NMS radius (ft)");
  cmd->add_option("--eval-radius", f.eval_radius, "GT matching radius (ft)");
  cmd->add_option("--intersection-radius", f.intersection_radius,
                  "False-positive intersection distance (ft)");
  cmd->add_option("--confidence-floor", f.confidence_floor,
                  "False-positive confidence floor (fraction)");
}

RunConfig assemble_config(const CLI::App* cmd, const Flags& f) {
  RunConfig cfg;
  if (cmd->count("--config") > 0) {
    std::ifstream in = open_or_throw(f.config);
    cfg = run_config_from_json(in, fs::path(f.config).filename().string());
  }
  const auto set_path = [&](const char* flag, auto setter) {
    if (cmd->count(flag) > 0) setter();
  };
  set_path("--old", [&] { cfg.old_detections = f.old_path; });
  set_path("--new", [&] { cfg.new_detections = f.new_path; });
  set_path("--roads", [&] { cfg.roads = f.roads; });
  set_path("--tiles", [&] { cfg.tiles = f.tiles; });
  set_path("--review", [&] { cfg.review = f.review; });
  set_path("--intersections", [&] { cfg.intersections = f.intersections; });
  set_path("--out", [&] { cfg.out_dir = f.out; });
  if (cmd->count("--mask-radius")) cfg.thresholds.mask_radius_ft = f.mask_radius;
  if (cmd->count("--change-radius")) cfg.thresholds.change_radius_ft = f.change_radius;
  if (cmd->count("--dedup-radius")) cfg.thresholds.dedup_radius_ft = f.dedup_radius;
  if (cmd->count("--eval-radius")) cfg.thresholds.eval_radius_ft = f.eval_radius;
  if (cmd->count("--intersection-radius")) {
    cfg.thresholds.intersection_radius_ft = f.intersection_radius;
  }
  if (cmd->count("--confidence-floor")) {
    cfg.thresholds.confidence_floor = f.confidence_floor;
  }
  if (cmd->count("--confidence-scale")) {
    cfg.confidence_scale = scale_from_string(f.confidence_scale);
  }
  if (cmd->count("--matching-mode")) {
    cfg.matching_mode = mode_from_string(f.matching_mode);
  }
  if (cmd->count("--jobs")) cfg.jobs = f.jobs;
  return cfg;
}

int cmd_synth(const CLI::App* cmd, const Flags& f) {
  ScenarioSpec spec;
  if (cmd->count("--config") > 0) {
    std::ifstream in = open_or_throw(f.config);
    spec = scenario_spec_from_json(in, fs::path(f.config).filename().string());
  }
  if (cmd->count("--seed") > 0) spec.seed = f.seed;
  const Scenario scenario = gen_scenario(spec);
  write_scenario(f.out, scenario, kSynthCrsLabel);
  std::printf("scenario: %zu old + %zu new detections, %zu roads -> %s\n",
              scenario.old_detections.size(), scenario.new_detections.size(),
              scenario.truth.roads.polylines.size(), f.out.c_str());
  return 0;
}

int cmd_mask(const CLI::App* cmd, const Flags& f) {
  const RunConfig cfg = assemble_config(cmd, f);
  if (cfg.roads.empty()) throw ValidationError("mask: --roads is required");
  if (cfg.old_detections.empty() && cfg.new_detections.empty()) {
    throw ValidationError("mask: provide --old and/or --new");
  }
  std::ifstream roads_in = open_or_throw(cfg.roads);
  const ParsedRoads roads = parse_roads(roads_in, cfg.roads.filename().string());

  DetectionParseOptions opts;
  opts.confidence_scale = cfg.confidence_scale;
  fs::create_directories(cfg.out_dir);
  const auto run_one = [&](const fs::path& path, Epoch epoch, const char* name) {
    std::ifstream in = open_or_throw(path);
    const ParsedDetections parsed =
        parse_detections(in, epoch, opts, path.filename().string());
    const std::vector<DetectionRecord> masked =
        mask_filter(parsed.records, roads.network, cfg.thresholds.mask_radius_ft);
    std::ostringstream body;
    write_detections(body, masked, parsed.crs_label);
    write_or_throw(cfg.out_dir / name, body.str());
    std::printf("mask: %s kept %zu/%zu -> %s\n", name, masked.size(),
                parsed.records.size(), (cfg.out_dir / name).string().c_str());
  };
  if (!cfg.old_detections.empty()) {
    run_one(cfg.old_detections, Epoch::Old, "masked_old.csv");
  }
  if (!cfg.new_detections.empty()) {
    run_one(cfg.new_detections, Epoch::New, "masked_new.csv");
  }
  return 0;
}

int cmd_changes(const CLI::App* cmd, const Flags& f) {
  const RunConfig cfg = assemble_config(cmd, f);
  if (cfg.old_detections.empty() || cfg.new_detections.empty()) {
    throw ValidationError("changes: --old and --new are required");
  }
  DetectionParseOptions opts;
  opts.confidence_scale = cfg.confidence_scale;
  std::ifstream old_in = open_or_throw(cfg.old_detections);
  const ParsedDetections old_parsed = parse_detections(
      old_in, Epoch::Old, opts, cfg.old_detections.filename().string());
  std::ifstream new_in = open_or_throw(cfg.new_detections);
  const ParsedDetections new_parsed = parse_detections(
      new_in, Epoch::New, opts, cfg.new_detections.filename().string());

  std::vector<ChangeRecord> candidates = detect_new(
      new_parsed.records, old_parsed.records, cfg.thresholds.change_radius_ft);
  std::vector<ChangeRecord> removed = detect_removed(
      old_parsed.records, new_parsed.records, cfg.thresholds.change_radius_ft);
  candidates.insert(candidates.end(), std::make_move_iterator(removed.begin()),
                    std::make_move_iterator(removed.end()));
  number_changes(candidates);
  set_epoch_labels(candidates, cfg.old_epoch_label, cfg.new_epoch_label);

  fs::create_directories(cfg.out_dir);
  write_or_throw(cfg.out_dir / "candidates.geojson",
                 export_geojson(candidates, old_parsed.crs_label));
  write_or_throw(cfg.out_dir / "candidates.csv", export_changes_csv(candidates));
  std::printf("changes: %zu candidates -> %s\n", candidates.size(),
              cfg.out_dir.string().c_str());
  return 0;
}

int cmd_post(const CLI::App* cmd, const Flags& f, const std::string& in_path) {
  const RunConfig cfg = assemble_config(cmd, f);
  if (in_path.empty()) throw ValidationError("post: --in is required");
  if (cfg.roads.empty()) throw ValidationError("post: --roads is required");

  std::ifstream changes_in = open_or_throw(in_path);
  const ParsedChanges imported =
      import_geojson(changes_in, fs::path(in_path).filename().string());
  std::ifstream roads_in = open_or_throw(cfg.roads);
  const ParsedRoads roads = parse_roads(roads_in, cfg.roads.filename().string());

  std::vector<ChangeRecord> new_side, removed_side;
  for (const ChangeRecord& c : imported.records) {
    (c.kind == ChangeKind::NewCandidate ? new_side : removed_side).push_back(c);
  }
  std::vector<ChangeRecord> candidates =
      dedup(new_side, cfg.thresholds.dedup_radius_ft);
  std::vector<ChangeRecord> removed_kept =
      dedup(removed_side, cfg.thresholds.dedup_radius_ft);
  candidates.insert(candidates.end(),
                    std::make_move_iterator(removed_kept.begin()),
                    std::make_move_iterator(removed_kept.end()));

  std::vector<IntersectionPoint> intersections;
  if (cfg.intersections) {
    std::ifstream in = open_or_throw(*cfg.intersections);
    intersections =
        parse_intersections_csv(in, cfg.intersections->filename().string());
  } else {
    intersections = derive_intersections(roads.network);
  }

  FpFilterResult filtered =
      fp_filter(candidates, intersections, cfg.thresholds.confidence_floor,
                cfg.thresholds.intersection_radius_ft);
  split_by_system(filtered.retained, roads.network, cfg.thresholds.mask_radius_ft);
  split_by_system(filtered.discarded, roads.network, cfg.thresholds.mask_radius_ft);
  if (cfg.review) {
    std::ifstream in = open_or_throw(*cfg.review);
    apply_review(filtered.retained,
                 parse_review(in, cfg.review->filename().string()));
  }

  const ChangeSummary summary =
      summarize(filtered.retained, cfg.thresholds,
                {cfg.old_epoch_label, cfg.new_epoch_label});
  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.thresholds = cfg.thresholds;
  manifest.crs_label = imported.crs_label;
  manifest.inputs.emplace_back("candidates", in_path, file_digest_hex(in_path));
  manifest.inputs.emplace_back("roads", cfg.roads.string(),
                               file_digest_hex(cfg.roads));

  fs::create_directories(cfg.out_dir);
  write_or_throw(cfg.out_dir / "changes.geojson",
                 export_geojson(filtered.retained, imported.crs_label));
  write_or_throw(cfg.out_dir / "changes.csv",
                 export_changes_csv(filtered.retained));
  write_or_throw(cfg.out_dir / "discarded_fp.csv",
                 export_discarded_csv(filtered.discarded));
  write_or_throw(cfg.out_dir / "summary.json", export_summary(summary, manifest));
  std::printf("post: %zu retained, %zu discarded -> %s\n",
              filtered.retained.size(), filtered.discarded.size(),
              cfg.out_dir.string().c_str());
  return 0;
}

int cmd_eval(const CLI::App* cmd, const Flags& f, const std::string& gt_path,
             const std::string& model_path, const std::string& out_file) {
  const RunConfig cfg = assemble_config(cmd, f);
  if (gt_path.empty() || model_path.empty()) {
    throw ValidationError("eval: --gt and --model are required");
  }
  DetectionParseOptions opts;
  opts.confidence_scale = cfg.confidence_scale;
  std::ifstream gt_in = open_or_throw(gt_path);
  const ParsedDetections gt = parse_detections(
      gt_in, Epoch::Old, opts, fs::path(gt_path).filename().string());
  std::ifstream model_in = open_or_throw(model_path);
  const ParsedDetections model = parse_detections(
      model_in, Epoch::New, opts, fs::path(model_path).filename().string());

  std::vector<WorldPoint> gt_pts, model_pts;
  for (const DetectionRecord& r : gt.records) gt_pts.push_back(r.pos);
  for (const DetectionRecord& r : model.records) model_pts.push_back(r.pos);

  const MatchCounts counts = match_points(gt_pts, model_pts,
                                          cfg.thresholds.eval_radius_ft,
                                          cfg.matching_mode);
  const MatchReport report =
      compute_metrics(counts, cfg.thresholds.eval_radius_ft, cfg.matching_mode);
  const std::string body = report_json(report);
  std::fputs(body.c_str(), stdout);
  if (!out_file.empty()) write_or_throw(out_file, body);
  return 0;
}

int cmd_report(const CLI::App* cmd, const Flags& f, const std::string& in_path) {
  const RunConfig cfg = assemble_config(cmd, f);
  if (in_path.empty()) throw ValidationError("report: --in is required");
  std::ifstream in = open_or_throw(in_path);
  const ParsedChanges imported =
      import_geojson(in, fs::path(in_path).filename().string());

  const ChangeSummary summary =
      summarize(imported.records, cfg.thresholds,
                {cfg.old_epoch_label, cfg.new_epoch_label});
  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.thresholds = cfg.thresholds;
  manifest.crs_label = imported.crs_label;
  manifest.inputs.emplace_back("changes", in_path, file_digest_hex(in_path));

  fs::create_directories(cfg.out_dir);
  write_or_throw(cfg.out_dir / "summary.json", export_summary(summary, manifest));
  write_or_throw(cfg.out_dir / "changes.csv",
                 export_changes_csv(imported.records));
  std::printf("report: %lld changes summarized -> %s\n",
              static_cast<long long>(summary.total_changes),
              cfg.out_dir.string().c_str());
  return 0;
}

int cmd_pipeline(const CLI::App* cmd, const Flags& f) {
  const RunConfig cfg = assemble_config(cmd, f);
  const PipelineResult result = run_pipeline(cfg);
  std::printf(
      "pipeline: %lld changes (%lld ON / %lld OFF), %zu discarded -> %s\n",
      static_cast<long long>(result.summary.total_changes),
      static_cast<long long>(result.summary.on_system),
      static_cast<long long>(result.summary.off_system),
      result.discarded.size(), cfg.out_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xwalk: bi-temporal crosswalk change detection toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Flags f;
  std::string in_path, gt_path, model_path, eval_out;

  const auto add_common = [&](CLI::App* cmd, bool with_thresholds = true) {
    cmd->add_option("--config", f.config, "JSON config file (flags win)");
    cmd->add_option("--old", f.old_path, "Old-epoch detections CSV");
    cmd->add_option("--new", f.new_path, "New-epoch detections CSV");
    cmd->add_option("--roads", f.roads, "Road centerlines GeoJSON");
    cmd->add_option("--tiles", f.tiles, "Tile metadata CSV");
    cmd->add_option("--review", f.review, "Review annotations CSV");
    cmd->add_option("--intersections", f.intersections,
                    "Intersections CSV override (x,y)");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--confidence-scale", f.confidence_scale,
                    "fraction|percent");
    cmd->add_option("--matching-mode", f.matching_mode,
                    "rules-as-stated|one-to-one");
    cmd->add_option("--jobs", f.jobs, "Worker cap for parallel stages");
    if (with_thresholds) add_threshold_flags(cmd, f);
    return cmd;
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  synth->add_option("--config", f.config, "Scenario spec JSON");
  synth->add_option("--seed", f.seed, "Override the scenario seed");
  synth->add_option("--out", f.out, "Output directory");

  CLI::App* mask = add_common(
      app.add_subcommand("mask", "Road-buffer masking of detections"));
  CLI::App* changes = add_common(
      app.add_subcommand("changes", "Inverse-selection change candidates"));
  CLI::App* post = add_common(app.add_subcommand(
      "post", "Dedup, false-positive filter, system split, review"));
  post->add_option("--in", in_path, "Candidates GeoJSON");
  CLI::App* eval =
      add_common(app.add_subcommand("eval", "Score detections against GT"));
  eval->add_option("--gt", gt_path, "Ground-truth points CSV");
  eval->add_option("--model", model_path, "Model detections CSV");
  eval->add_option("--report-out", eval_out, "Also write the JSON report here");
  CLI::App* report_cmd = add_common(
      app.add_subcommand("report", "Summarize a changes GeoJSON"));
  report_cmd->add_option("--in", in_path, "Changes GeoJSON");
  CLI::App* pipeline =
      add_common(app.add_subcommand("pipeline", "Run the full chain"));

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(synth, f);
    if (mask->parsed()) return cmd_mask(mask, f);
    if (changes->parsed()) return cmd_changes(changes, f);
    if (post->parsed()) return cmd_post(post, f, in_path);
    if (eval->parsed()) return cmd_eval(eval, f, gt_path, model_path, eval_out);
    if (report_cmd->parsed()) return cmd_report(report_cmd, f, in_path);
    if (pipeline->parsed()) return cmd_pipeline(pipeline, f);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const xwalk::ValidationError& e) {
    std::fprintf(stderr, "[error] %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[internal error] %s\n", e.what());
    return 2;
  }
}
