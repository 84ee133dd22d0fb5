#include "xwalk/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "xwalk/error.hpp"
#include "xwalk/postprocess.hpp"

namespace xwalk {
namespace {

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::string fixed3(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::vector<const ChangeRecord*> sorted_by_id(
    std::span<const ChangeRecord> changes) {
  std::vector<const ChangeRecord*> ptrs;
  ptrs.reserve(changes.size());
  for (const ChangeRecord& c : changes) ptrs.push_back(&c);
  std::sort(ptrs.begin(), ptrs.end(),
            [](const ChangeRecord* a, const ChangeRecord* b) {
              return change_id_less(a->change_id, b->change_id);
            });
  return ptrs;
}

}  // namespace

ChangeSummary summarize(std::span<const ChangeRecord> changes,
                        const Thresholds& thresholds,
                        const std::pair<std::string, std::string>& epochs) {
  ChangeSummary s;
  s.thresholds = thresholds;
  s.epochs = epochs;
  s.total_changes = static_cast<std::int64_t>(changes.size());
  for (const ChangeRecord& c : changes) {
    (c.system == RoadSystem::On ? s.on_system : s.off_system) += 1;
    switch (c.status) {
      case ChangeStatus::Candidate: ++s.n_candidate; break;
      case ChangeStatus::New: ++s.n_new; break;
      case ChangeStatus::Modified: ++s.n_modified; break;
      case ChangeStatus::FalsePositive: ++s.n_false_positive; break;
    }
  }
  return s;
}

std::string export_geojson(std::span<const ChangeRecord> changes,
                           const std::optional<std::string>& crs_label) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  if (crs_label) {
    doc["crs"] = {{"type", "name"}, {"properties", {{"name", *crs_label}}}};
  }
  doc["features"] = nlohmann::ordered_json::array();
  for (const ChangeRecord* c : sorted_by_id(changes)) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"]["type"] = "Point";
    f["geometry"]["coordinates"] = {round3(c->pos.x), round3(c->pos.y)};
    nlohmann::ordered_json& p = f["properties"];
    p["change_id"] = c->change_id;
    p["kind"] = std::string(change_kind_name(c->kind));
    p["status"] = std::string(change_status_name(c->status));
    p["system"] = std::string(road_system_name(c->system));
    p["confidence"] = round3(c->confidence);
    if (std::isinf(c->nearest_other_epoch_dist_ft)) {
      p["nearest_other_epoch_dist_ft"] = nullptr;
    } else {
      p["nearest_other_epoch_dist_ft"] = round3(c->nearest_other_epoch_dist_ft);
    }
    doc["features"].push_back(std::move(f));
  }
  return doc.dump(2) + "\n";
}

namespace {

using nlohmann::json;

ChangeKind kind_from_name(const std::string& s, const std::string& source,
                          long feature) {
  if (s == "NEW-CANDIDATE") return ChangeKind::NewCandidate;
  if (s == "REMOVED-CANDIDATE") return ChangeKind::RemovedCandidate;
  throw feature_error(source, feature, "unknown kind '" + s + "'");
}

ChangeStatus status_from_name(const std::string& s, const std::string& source,
                              long feature) {
  if (s == "CANDIDATE") return ChangeStatus::Candidate;
  if (s == "NEW") return ChangeStatus::New;
  if (s == "MODIFIED") return ChangeStatus::Modified;
  if (s == "FALSE-POSITIVE") return ChangeStatus::FalsePositive;
  throw feature_error(source, feature, "unknown status '" + s + "'");
}

}  // namespace

ParsedChanges import_geojson(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw ValidationError(source + ": expected a GeoJSON FeatureCollection");
  }

  ParsedChanges out;
  if (doc.contains("crs")) {
    const json& crs = doc["crs"];
    if (crs.is_string()) {
      out.crs_label = crs.get<std::string>();
    } else if (crs.is_object() && crs.contains("properties") &&
               crs["properties"].contains("name")) {
      out.crs_label = crs["properties"]["name"].get<std::string>();
    }
  }

  const json& features = doc["features"];
  for (long fi = 0; fi < static_cast<long>(features.size()); ++fi) {
    const json& f = features[fi];
    if (!f.is_object() || f.value("type", "") != "Feature") {
      throw feature_error(source, fi, "not a Feature");
    }
    if (!f.contains("geometry") || f["geometry"].value("type", "") != "Point" ||
        !f["geometry"].contains("coordinates")) {
      throw feature_error(source, fi, "geometry must be a Point");
    }
    const json& coords = f["geometry"]["coordinates"];
    if (!coords.is_array() || coords.size() < 2 || !coords[0].is_number() ||
        !coords[1].is_number()) {
      throw feature_error(source, fi, "malformed coordinates");
    }
    if (!f.contains("properties") || !f["properties"].is_object()) {
      throw feature_error(source, fi, "missing properties");
    }
    const json& p = f["properties"];
    for (const char* key :
         {"change_id", "kind", "status", "system", "confidence"}) {
      if (!p.contains(key)) {
        throw feature_error(source, fi, std::string("missing property '") + key + "'");
      }
    }

    ChangeRecord rec;
    rec.pos = {coords[0].get<double>(), coords[1].get<double>()};
    rec.change_id = p["change_id"].get<std::string>();
    rec.kind = kind_from_name(p["kind"].get<std::string>(), source, fi);
    rec.status = status_from_name(p["status"].get<std::string>(), source, fi);
    const std::string system = p["system"].get<std::string>();
    if (system == "ON") {
      rec.system = RoadSystem::On;
    } else if (system == "OFF") {
      rec.system = RoadSystem::Off;
    } else {
      throw feature_error(source, fi, "unknown system '" + system + "'");
    }
    if (!p["confidence"].is_number()) {
      throw feature_error(source, fi, "confidence must be a number");
    }
    rec.confidence = p["confidence"].get<double>();
    if (p.contains("nearest_other_epoch_dist_ft") &&
        !p["nearest_other_epoch_dist_ft"].is_null()) {
      rec.nearest_other_epoch_dist_ft =
          p["nearest_other_epoch_dist_ft"].get<double>();
    } else {
      rec.nearest_other_epoch_dist_ft = std::numeric_limits<double>::infinity();
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

namespace {

void append_change_row(std::ostringstream& out, const ChangeRecord& c) {
  out << c.change_id << ',' << fixed3(c.pos.x) << ',' << fixed3(c.pos.y) << ','
      << change_kind_name(c.kind) << ',' << change_status_name(c.status) << ','
      << road_system_name(c.system) << ',' << fixed3(c.confidence) << ','
      << fixed3(c.nearest_other_epoch_dist_ft);
}

}  // namespace

std::string export_changes_csv(std::span<const ChangeRecord> changes) {
  std::ostringstream out;
  out << "change_id,x,y,kind,status,system,confidence,nearest_other_epoch_dist_ft\n";
  for (const ChangeRecord* c : sorted_by_id(changes)) {
    append_change_row(out, *c);
    out << "\n";
  }
  return out.str();
}

std::string export_discarded_csv(std::span<const ChangeRecord> discarded) {
  std::ostringstream out;
  out << "change_id,x,y,kind,status,system,confidence,nearest_other_epoch_dist_ft,"
         "discard_reason\n";
  for (const ChangeRecord* c : sorted_by_id(discarded)) {
    append_change_row(out, *c);
    out << ",low-confidence-far-from-intersections\n";
  }
  return out.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (const char ch : bytes) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string file_digest_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot read file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string body = buf.str();
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(body)));
  return hex;
}

std::string export_summary(const ChangeSummary& summary,
                           const RunManifest& manifest) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json& s = j["summary"];
  s["total_changes"] = summary.total_changes;
  s["on_system"] = summary.on_system;
  s["off_system"] = summary.off_system;
  s["by_status"] = {{"CANDIDATE", summary.n_candidate},
                    {"NEW", summary.n_new},
                    {"MODIFIED", summary.n_modified},
                    {"FALSE-POSITIVE", summary.n_false_positive}};
  s["epochs"] = {{"old", summary.epochs.first}, {"new", summary.epochs.second}};

  nlohmann::ordered_json& m = j["manifest"];
  m["tool_version"] = manifest.tool_version;
  m["thresholds"] = {
      {"mask_radius_ft", manifest.thresholds.mask_radius_ft},
      {"change_radius_ft", manifest.thresholds.change_radius_ft},
      {"dedup_radius_ft", manifest.thresholds.dedup_radius_ft},
      {"eval_radius_ft", manifest.thresholds.eval_radius_ft},
      {"intersection_radius_ft", manifest.thresholds.intersection_radius_ft},
      {"confidence_floor", manifest.thresholds.confidence_floor}};
  m["confidence_scale"] = manifest.confidence_scale;
  m["matching_mode"] = manifest.matching_mode;
  m["crs_label"] = manifest.crs_label ? nlohmann::ordered_json(*manifest.crs_label)
                                      : nlohmann::ordered_json(nullptr);
  m["seed"] = manifest.seed ? nlohmann::ordered_json(*manifest.seed)
                            : nlohmann::ordered_json(nullptr);
  m["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [name, path, digest] : manifest.inputs) {
    m["inputs"][name] = {{"path", path}, {"fnv1a64", digest}};
  }
  return j.dump(2) + "\n";
}

}  // namespace xwalk
