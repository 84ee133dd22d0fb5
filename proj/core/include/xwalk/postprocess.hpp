#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xwalk/changedet.hpp"
#include "xwalk/geometry.hpp"
#include "xwalk/ingest.hpp"

namespace xwalk {

struct IntersectionPoint {
  WorldPoint pos;
  int degree = 2;  // distinct polylines incident to the junction
};

// Natural ordering for change ids: "C2" before "C10". Falls back to plain
// string comparison for ids without a numeric suffix.
bool change_id_less(const std::string& a, const std::string& b);

// Greedy confidence-ordered NMS. Points are visited sorted by
// (confidence desc, x asc, y asc, id asc); a point is kept iff no
// already-kept point lies within dedup_radius. Output is sorted by id, so
// the result is identical under any input permutation.
std::vector<ChangeRecord> dedup(std::span<const ChangeRecord> points,
                                double dedup_radius_ft);

// Junctions of the network: pairwise segment crossings plus endpoint touches
// between distinct polylines, with nearby events clustered within snap_tol.
// Endpoints landing within snap_tol of another polyline count as touches,
// which absorbs junctions digitized with small gaps. Output sorted by (x, y).
std::vector<IntersectionPoint> derive_intersections(const RoadNetwork& roads,
                                                    double snap_tol_ft = 1.0);

// Override layer for derived intersections. CSV with header x,y; supplied
// junctions carry the minimum degree of 2.
std::vector<IntersectionPoint> parse_intersections_csv(
    std::istream& in, const std::string& source = "intersections");

struct FpFilterResult {
  std::vector<ChangeRecord> retained;
  std::vector<ChangeRecord> discarded;  // status FALSE-POSITIVE
};

// Discards a change iff BOTH confidence < confidence_floor (strict) AND
// distance to the nearest intersection > intersection_radius. Discarded
// records are reported, never dropped.
FpFilterResult fp_filter(std::span<const ChangeRecord> changes,
                         std::span<const IntersectionPoint> intersections,
                         double confidence_floor, double intersection_radius_ft);

// Applies review labels: NEW/MODIFIED/FALSE-POSITIVE overwrite the status of
// the named change; unlabeled changes stay CANDIDATE. An annotation naming an
// unknown change_id rejects.
void apply_review(std::span<ChangeRecord> changes,
                  std::span<const ReviewAnnotation> annotations);

}  // namespace xwalk
