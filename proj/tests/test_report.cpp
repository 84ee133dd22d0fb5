#include "xwalk/report.hpp"

#include <cmath>
#include <sstream>

#include <doctest.h>

#include "test_util.hpp"
#include "xwalk/error.hpp"

using namespace xwalk;

namespace {

ChangeRecord change(const std::string& id, double x, double y,
                    ChangeKind kind = ChangeKind::NewCandidate,
                    ChangeStatus status = ChangeStatus::Candidate,
                    RoadSystem system = RoadSystem::Off) {
  ChangeRecord c;
  c.change_id = id;
  c.pos = {x, y};
  c.kind = kind;
  c.status = status;
  c.system = system;
  c.confidence = 0.875;
  c.nearest_other_epoch_dist_ft = 120.5;
  return c;
}

ParsedChanges import_str(const std::string& body) {
  std::istringstream in(body);
  return import_geojson(in, "changes.geojson");
}

}  // namespace

TEST_CASE("summarize basics") {
  const Thresholds t;
  const std::pair<std::string, std::string> epochs{"2019", "2021"};

  const ChangeSummary empty = summarize({}, t, epochs);
  CHECK(empty.total_changes == 0);
  CHECK(empty.on_system == 0);
  CHECK(empty.off_system == 0);
  CHECK(empty.n_candidate + empty.n_new + empty.n_modified +
            empty.n_false_positive ==
        0);

  const std::vector<ChangeRecord> changes = {
      change("C1", 0, 0, ChangeKind::NewCandidate, ChangeStatus::New,
             RoadSystem::On),
      change("C2", 1, 1, ChangeKind::NewCandidate, ChangeStatus::Modified,
             RoadSystem::On),
      change("C3", 2, 2, ChangeKind::RemovedCandidate, ChangeStatus::Candidate,
             RoadSystem::Off),
  };
  const ChangeSummary s = summarize(changes, t, epochs);
  CHECK(s.total_changes == 3);
  CHECK(s.on_system == 2);
  CHECK(s.off_system == 1);
  CHECK(s.n_new == 1);
  CHECK(s.n_modified == 1);
  CHECK(s.n_candidate == 1);
  CHECK(s.n_false_positive == 0);
  CHECK(s.on_system + s.off_system == s.total_changes);
  CHECK(s.epochs == epochs);
}

TEST_CASE("export_geojson empty and single-feature documents") {
  const std::string empty = export_geojson({});
  CHECK(empty.find("\"FeatureCollection\"") != std::string::npos);
  CHECK(empty.find("\"features\": []") != std::string::npos);

  const std::vector<ChangeRecord> one = {change("C1", 100.1234, 200.9876)};
  const std::string body = export_geojson(one, std::string("FL-FT"));
  for (const char* needle :
       {"\"change_id\": \"C1\"", "\"kind\": \"NEW-CANDIDATE\"",
        "\"status\": \"CANDIDATE\"", "\"system\": \"OFF\"",
        "\"confidence\": 0.875", "\"nearest_other_epoch_dist_ft\": 120.5",
        "\"FL-FT\"", "100.123", "200.988"}) {
    CHECK(body.find(needle) != std::string::npos);
  }
}

TEST_CASE("geojson features are sorted by change_id, naturally") {
  const std::vector<ChangeRecord> changes = {change("C10", 1, 1),
                                             change("C2", 2, 2),
                                             change("C1", 3, 3)};
  const std::string body = export_geojson(changes);
  const auto p1 = body.find("\"C1\"");
  const auto p2 = body.find("\"C2\"");
  const auto p10 = body.find("\"C10\"");
  REQUIRE(p1 != std::string::npos);
  CHECK(p1 < p2);
  CHECK(p2 < p10);
}

TEST_CASE("geojson parse-export-parse fixpoint") {
  std::vector<ChangeRecord> changes;
  auto rng = test::make_rng(71);
  for (int i = 0; i < 50; ++i) {
    ChangeRecord c = change("C" + std::to_string(i + 1),
                            test::urand(rng, 0, 1e6), test::urand(rng, 0, 1e6));
    c.confidence = test::urand(rng, 0, 1);
    c.nearest_other_epoch_dist_ft = test::urand(rng, 36, 1e4);
    if (i % 7 == 0) {
      c.nearest_other_epoch_dist_ft = std::numeric_limits<double>::infinity();
    }
    changes.push_back(c);
  }
  const ParsedChanges first = import_str(export_geojson(changes, std::string("X")));
  const std::string body = export_geojson(first.records, first.crs_label);
  const ParsedChanges second = import_str(body);
  CHECK(second.records == first.records);
  CHECK(export_geojson(second.records, second.crs_label) == body);
  CHECK(first.crs_label == "X");
}

TEST_CASE("import_geojson rejections name the feature") {
  CHECK_THROWS_AS(import_str("{broken"), ValidationError);
  CHECK_THROWS_AS(import_str(R"({"type": "X", "features": []})"),
                  ValidationError);
  // Missing property.
  CHECK_THROWS_WITH_AS(import_str(R"({
    "type": "FeatureCollection",
    "features": [
      {"type": "Feature",
       "geometry": {"type": "Point", "coordinates": [1, 2]},
       "properties": {"change_id": "C1"}}
    ]
  })"),
                       doctest::Contains("feature 0"), ValidationError);
  // Non-point geometry.
  CHECK_THROWS_AS(import_str(R"({
    "type": "FeatureCollection",
    "features": [
      {"type": "Feature",
       "geometry": {"type": "LineString", "coordinates": [[0,0],[1,1]]},
       "properties": {}}
    ]
  })"),
                  ValidationError);
  // Unknown enum value.
  CHECK_THROWS_AS(import_str(R"({
    "type": "FeatureCollection",
    "features": [
      {"type": "Feature",
       "geometry": {"type": "Point", "coordinates": [1, 2]},
       "properties": {"change_id": "C1", "kind": "WEIRD", "status": "CANDIDATE",
                      "system": "OFF", "confidence": 0.5}}
    ]
  })"),
                  ValidationError);
}

TEST_CASE("csv exports") {
  const std::vector<ChangeRecord> changes = {
      change("C2", 10, 20), change("C1", 1, 2, ChangeKind::RemovedCandidate)};
  const std::string csv = export_changes_csv(changes);
  CHECK(csv.find("change_id,x,y,kind,status,system,confidence,"
                 "nearest_other_epoch_dist_ft\n") == 0);
  // Sorted by id: C1 row first.
  CHECK(csv.find("C1,") < csv.find("C2,"));
  CHECK(csv.find("REMOVED-CANDIDATE") != std::string::npos);
  CHECK(csv.find("10.000,20.000") != std::string::npos);

  ChangeRecord fp = change("C3", 5, 5);
  fp.status = ChangeStatus::FalsePositive;
  const std::string discarded = export_discarded_csv({&fp, 1});
  CHECK(discarded.find("discard_reason") != std::string::npos);
  CHECK(discarded.find("low-confidence-far-from-intersections") !=
        std::string::npos);
  // Infinite distances stay parseable.
  ChangeRecord inf_rec = change("C4", 5, 5);
  inf_rec.nearest_other_epoch_dist_ft = std::numeric_limits<double>::infinity();
  CHECK(export_changes_csv({&inf_rec, 1}).find(",inf") != std::string::npos);
}

TEST_CASE("summary export is byte-deterministic and digest-sensitive") {
  const test::TempDir dir("report");
  test::write_file(dir.path() / "input.csv", "x,y,confidence\n1,2,0.5\n");

  const Thresholds t;
  ChangeSummary summary = summarize({}, t, {"OLD", "NEW"});
  RunManifest manifest;
  manifest.tool_version = "0.1.0";
  manifest.thresholds = t;
  manifest.crs_label = "FL-FT";
  manifest.seed = 42;
  manifest.inputs.emplace_back("old_detections",
                               (dir.path() / "input.csv").string(),
                               file_digest_hex(dir.path() / "input.csv"));

  const std::string a = export_summary(summary, manifest);
  const std::string b = export_summary(summary, manifest);
  CHECK(a == b);
  // Thresholds echoed verbatim.
  CHECK(a.find("\"mask_radius_ft\": 100.0") != std::string::npos);
  CHECK(a.find("\"change_radius_ft\": 36.0") != std::string::npos);
  CHECK(a.find("\"dedup_radius_ft\": 24.0") != std::string::npos);
  CHECK(a.find("\"eval_radius_ft\": 30.0") != std::string::npos);
  CHECK(a.find("\"intersection_radius_ft\": 90.0") != std::string::npos);
  CHECK(a.find("\"confidence_floor\": 0.5") != std::string::npos);
  CHECK(a.find("\"seed\": 42") != std::string::npos);

  // Any input byte change flips the digest.
  test::write_file(dir.path() / "input.csv", "x,y,confidence\n1,2,0.6\n");
  RunManifest manifest2 = manifest;
  manifest2.inputs[0] = {"old_detections", (dir.path() / "input.csv").string(),
                         file_digest_hex(dir.path() / "input.csv")};
  CHECK(export_summary(summary, manifest2) != a);
}

TEST_CASE("fnv1a64 known values") {
  // Reference vectors for 64-bit FNV-1a.
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("a") == 12638187200555641996ULL);
  CHECK(fnv1a64("foobar") == 9625390261332436968ULL);
}
