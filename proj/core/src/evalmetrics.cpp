#include "xwalk/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xwalk/error.hpp"
#include "xwalk/spatial_index.hpp"

namespace xwalk {

std::string_view matching_mode_name(MatchingMode m) {
  return m == MatchingMode::RulesAsStated ? "rules-as-stated" : "one-to-one";
}

namespace {

PointIndex build_index(std::span<const WorldPoint> pts) {
  std::vector<std::pair<std::int64_t, WorldPoint>> entries;
  entries.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    entries.emplace_back(static_cast<std::int64_t>(i), pts[i]);
  }
  return PointIndex(entries);
}

MatchCounts match_rules_as_stated(std::span<const WorldPoint> gt,
                                  std::span<const WorldPoint> model,
                                  double radius) {
  const PointIndex gt_index = build_index(gt);
  const PointIndex model_index = build_index(model);

  MatchCounts c;
  c.gt_count = static_cast<std::int64_t>(gt.size());
  c.model_count = static_cast<std::int64_t>(model.size());
  for (const WorldPoint& g : gt) {
    const auto nearest = model_index.query_nearest(g);
    if (!nearest || !within_radius(nearest->distance_ft, radius)) ++c.fn;
  }
  for (const WorldPoint& m : model) {
    const auto nearest = gt_index.query_nearest(m);
    if (!nearest || !within_radius(nearest->distance_ft, radius)) ++c.fp;
  }
  c.tp = c.gt_count - c.fn;
  return c;
}

MatchCounts match_one_to_one(std::span<const WorldPoint> gt,
                             std::span<const WorldPoint> model, double radius) {
  const PointIndex gt_index = build_index(gt);

  struct Pair {
    double d;
    std::int64_t g, m;
  };
  std::vector<Pair> pairs;
  for (std::size_t m = 0; m < model.size(); ++m) {
    for (const IdDistance& hit :
         gt_index.query_within(model[m], radius + kDistanceTolFt)) {
      pairs.push_back({hit.distance_ft, hit.id, static_cast<std::int64_t>(m)});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.d, a.g, a.m) < std::tie(b.d, b.g, b.m);
  });

  std::vector<bool> g_used(gt.size(), false), m_used(model.size(), false);
  std::int64_t matched = 0;
  for (const Pair& p : pairs) {
    if (g_used[p.g] || m_used[p.m]) continue;
    g_used[p.g] = true;
    m_used[p.m] = true;
    ++matched;
  }

  MatchCounts c;
  c.gt_count = static_cast<std::int64_t>(gt.size());
  c.model_count = static_cast<std::int64_t>(model.size());
  c.tp = matched;
  c.fn = c.gt_count - matched;
  c.fp = c.model_count - matched;
  return c;
}

double round_pct(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

MatchCounts match_points(std::span<const WorldPoint> gt,
                         std::span<const WorldPoint> model, double eval_radius_ft,
                         MatchingMode mode) {
  if (!(eval_radius_ft > 0.0)) {
    throw ValidationError("match_points: eval radius must be > 0");
  }
  return mode == MatchingMode::RulesAsStated
             ? match_rules_as_stated(gt, model, eval_radius_ft)
             : match_one_to_one(gt, model, eval_radius_ft);
}

MatchReport compute_metrics(const MatchCounts& counts, double radius_ft,
                            MatchingMode mode) {
  if (counts.gt_count <= 0) {
    throw ValidationError("compute_metrics: GT count must be > 0");
  }
  if (counts.model_count <= 0) {
    throw ValidationError("compute_metrics: model count must be > 0");
  }
  if (counts.fn < 0 || counts.fn > counts.gt_count) {
    throw ValidationError("compute_metrics: FN outside [0, GT]");
  }
  if (counts.fp < 0 || counts.fp > counts.model_count) {
    throw ValidationError("compute_metrics: FP outside [0, M]");
  }

  const double gt = static_cast<double>(counts.gt_count);
  const double m = static_cast<double>(counts.model_count);
  const double fn = static_cast<double>(counts.fn);
  const double fp = static_cast<double>(counts.fp);

  MatchReport r;
  r.counts = counts;
  r.counts.tp = counts.gt_count - counts.fn;
  r.completeness_pct = (gt - fn) / gt * 100.0;
  r.correctness_pct = (m - fp) / m * 100.0;
  r.quality_pct = (gt - fn) / (gt + fp) * 100.0;
  r.radius_ft = radius_ft;
  r.mode = mode;
  return r;
}

std::string report_json(const MatchReport& report) {
  nlohmann::ordered_json j;
  j["gt"] = report.counts.gt_count;
  j["m"] = report.counts.model_count;
  j["tp"] = report.counts.tp;
  j["fn"] = report.counts.fn;
  j["fp"] = report.counts.fp;
  j["completeness_pct"] = round_pct(report.completeness_pct);
  j["correctness_pct"] = round_pct(report.correctness_pct);
  j["quality_pct"] = round_pct(report.quality_pct);
  j["radius_ft"] = report.radius_ft;
  j["matching_mode"] = std::string(matching_mode_name(report.mode));
  return j.dump(2) + "\n";
}

}  // namespace xwalk
