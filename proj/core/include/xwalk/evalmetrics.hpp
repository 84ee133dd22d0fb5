#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "xwalk/geometry.hpp"

namespace xwalk {

enum class MatchingMode {
  // FN = GT points with no model point within the radius, FP symmetric,
  // TP = GT - FN. Not one-to-one: a single model point can cover several GT
  // points. This is the counting that keeps the reference table arithmetic
  // self-consistent.
  RulesAsStated,
  // Greedy nearest-pair matching, each point matched at most once.
  OneToOne,
};

std::string_view matching_mode_name(MatchingMode m);

struct MatchCounts {
  std::int64_t gt_count = 0;
  std::int64_t model_count = 0;
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;
};

struct MatchReport {
  MatchCounts counts;
  double completeness_pct = 0.0;  // (GT - FN) / GT, recall
  double correctness_pct = 0.0;   // (M - FP) / M, precision
  double quality_pct = 0.0;       // (GT - FN) / (GT + FP), IoU-style
  double radius_ft = 0.0;
  MatchingMode mode = MatchingMode::RulesAsStated;
};

MatchCounts match_points(std::span<const WorldPoint> gt,
                         std::span<const WorldPoint> model, double eval_radius_ft,
                         MatchingMode mode = MatchingMode::RulesAsStated);

// Percentages from the counts; rejects zero denominators. Values are exact
// doubles; JSON reporting rounds to 0.01 percentage points.
MatchReport compute_metrics(const MatchCounts& counts, double radius_ft = 30.0,
                            MatchingMode mode = MatchingMode::RulesAsStated);

// {"gt": ..., "m": ..., "tp": ..., "fn": ..., "fp": ...,
//  "completeness_pct": ..., "correctness_pct": ..., "quality_pct": ...,
//  "radius_ft": ..., "matching_mode": ...}
std::string report_json(const MatchReport& report);

}  // namespace xwalk
