#include "xwalk/spatial_index.hpp"

#include <algorithm>
#include <doctest.h>

#include "test_util.hpp"
#include "xwalk/error.hpp"

using namespace xwalk;
using test::make_rng;
using test::random_point;
using test::urand;

namespace {

using Entry = std::pair<std::int64_t, WorldPoint>;

std::vector<Entry> random_entries(std::mt19937_64& rng, int n, double lo,
                                  double hi) {
  std::vector<Entry> entries;
  entries.reserve(n);
  for (int i = 0; i < n; ++i) {
    entries.emplace_back(i, random_point(rng, lo, hi));
  }
  return entries;
}

// Linear-scan oracles the index must match exactly.
std::vector<IdDistance> scan_within(const std::vector<Entry>& entries,
                                    const WorldPoint& c, double r) {
  std::vector<IdDistance> out;
  for (const auto& [id, pos] : entries) {
    const double d = dist_pp(pos, c);
    if (d <= r) out.push_back({id, d});
  }
  std::sort(out.begin(), out.end(),
            [](const IdDistance& a, const IdDistance& b) { return a.id < b.id; });
  return out;
}

std::optional<IdDistance> scan_nearest(const std::vector<Entry>& entries,
                                       const WorldPoint& c) {
  std::optional<IdDistance> best;
  for (const auto& [id, pos] : entries) {
    const double d = dist_pp(pos, c);
    if (!best || d < best->distance_ft ||
        (d == best->distance_ft && id < best->id)) {
      best = IdDistance{id, d};
    }
  }
  return best;
}

}  // namespace

TEST_CASE("point index basics") {
  CHECK(PointIndex().query_within({0, 0}, 100).empty());
  CHECK_FALSE(PointIndex().query_nearest({0, 0}).has_value());

  const std::vector<Entry> one = {{7, {3, 4}}};
  const PointIndex ix(one);
  const auto nearest = ix.query_nearest({0, 0});
  REQUIRE(nearest.has_value());
  CHECK(nearest->id == 7);
  CHECK(nearest->distance_ft == doctest::Approx(5.0));
}

TEST_CASE("point index rejects duplicate ids") {
  const std::vector<Entry> dup = {{1, {0, 0}}, {1, {5, 5}}};
  CHECK_THROWS_AS(PointIndex{dup}, ValidationError);
}

TEST_CASE("duplicate coordinates with distinct ids are both retrievable") {
  const std::vector<Entry> entries = {{1, {10, 10}}, {2, {10, 10}}, {3, {50, 50}}};
  const PointIndex ix(entries);
  const auto hits = ix.query_within({10, 10}, 0.0);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].id == 1);
  CHECK(hits[1].id == 2);
  // Nearest tie breaks on the smaller id.
  CHECK(ix.query_nearest({10, 10})->id == 1);
}

TEST_CASE("closed-ball boundary: point exactly at radius is included") {
  const std::vector<Entry> entries = {{1, {30, 0}}};
  const PointIndex ix(entries);
  CHECK(ix.query_within({0, 0}, 30.0).size() == 1);
  CHECK(ix.query_within({0, 0}, 29.999).empty());
  // r = 0 at an indexed point returns that point only.
  const std::vector<Entry> two = {{1, {5, 5}}, {2, {6, 5}}};
  const PointIndex ix2(two);
  const auto hits = ix2.query_within({5, 5}, 0.0);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].id == 1);
}

TEST_CASE("point index equals linear scan on random instances") {
  auto rng = make_rng(21);
  const std::vector<Entry> entries = random_entries(rng, 1000, 0, 10000);
  const PointIndex ix(entries);
  for (int q = 0; q < 100; ++q) {
    const WorldPoint c = random_point(rng, -500, 10500);
    const double r = urand(rng, 0, 2000);
    CHECK(ix.query_within(c, r) == scan_within(entries, c, r));
    const auto got = ix.query_nearest(c);
    const auto want = scan_nearest(entries, c);
    REQUIRE(got.has_value());
    CHECK(got->id == want->id);
    CHECK(got->distance_ft == want->distance_ft);
  }
}

TEST_CASE("point index build determinism under permutation") {
  auto rng = make_rng(22);
  std::vector<Entry> entries = random_entries(rng, 300, 0, 1000);
  const PointIndex a(entries);
  std::shuffle(entries.begin(), entries.end(), rng);
  const PointIndex b(entries);
  for (int q = 0; q < 50; ++q) {
    const WorldPoint c = random_point(rng, 0, 1000);
    const double r = urand(rng, 0, 300);
    CHECK(a.query_within(c, r) == b.query_within(c, r));
    CHECK(a.query_nearest(c)->id == b.query_nearest(c)->id);
  }
}

TEST_CASE("query_within monotonicity in radius") {
  auto rng = make_rng(23);
  const std::vector<Entry> entries = random_entries(rng, 400, 0, 1000);
  const PointIndex ix(entries);
  for (int q = 0; q < 50; ++q) {
    const WorldPoint c = random_point(rng, 0, 1000);
    const double r1 = urand(rng, 0, 200);
    const double r2 = r1 + urand(rng, 0, 200);
    const auto small = ix.query_within(c, r1);
    const auto large = ix.query_within(c, r2);
    for (const IdDistance& hit : small) {
      CHECK(std::find(large.begin(), large.end(), hit) != large.end());
    }
  }
}

TEST_CASE("segment index basics") {
  const std::vector<Polyline> lines = {Polyline(0, {{0, 0}, {10, 0}})};
  const SegmentIndex ix(lines);
  CHECK(ix.segment_count() == 1);
  // Point on the centerline.
  CHECK(ix.query_segment_distance({5, 0}).second == 0.0);
  // One-segment network equals dist_point_segment.
  const WorldPoint p{3, 7};
  CHECK(ix.query_segment_distance(p).second ==
        dist_point_segment(p, {0, 0}, {10, 0}));
  CHECK_THROWS_AS(SegmentIndex().query_segment_distance({0, 0}), ValidationError);
}

TEST_CASE("segment index equals brute force on random networks") {
  auto rng = make_rng(24);
  std::vector<Polyline> lines;
  for (int i = 0; i < 40; ++i) {
    std::vector<WorldPoint> verts;
    WorldPoint cur = random_point(rng, 0, 5000);
    verts.push_back(cur);
    for (int k = 0; k < 5; ++k) {
      cur = {cur.x + urand(rng, 50, 400), cur.y + urand(rng, -300, 300)};
      verts.push_back(cur);
    }
    lines.emplace_back(i, verts);
  }
  const SegmentIndex ix(lines);

  for (int q = 0; q < 200; ++q) {
    const WorldPoint p = random_point(rng, -500, 8000);
    std::int64_t best_id = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Polyline& pl : lines) {
      const double d = dist_point_polyline(p, pl);
      if (d < best_d || (d == best_d && pl.id() < best_id)) {
        best_d = d;
        best_id = pl.id();
      }
    }
    const auto [got_id, got_d] = ix.query_segment_distance(p);
    CHECK(got_id == best_id);
    CHECK(got_d == best_d);
  }
}

TEST_CASE("segment query_within matches brute force") {
  auto rng = make_rng(25);
  std::vector<Polyline> lines;
  for (int i = 0; i < 10; ++i) {
    lines.emplace_back(
        i, std::vector<WorldPoint>{random_point(rng, 0, 1000),
                                   random_point(rng, 0, 1000)});
  }
  const SegmentIndex ix(lines);
  for (int q = 0; q < 100; ++q) {
    const WorldPoint p = random_point(rng, 0, 1000);
    const double r = urand(rng, 0, 400);
    const auto hits = ix.query_within(p, r);
    std::size_t brute = 0;
    for (const Polyline& pl : lines) {
      if (dist_point_polyline(p, pl) <= r) ++brute;
    }
    CHECK(hits.size() >= brute);  // per-segment hits vs per-polyline count
    for (const SegmentHit& h : hits) CHECK(h.distance_ft <= r);
    // Every polyline within r contributes at least one hit.
    std::size_t distinct = 0;
    std::int64_t last = -1;
    for (const SegmentHit& h : hits) {
      if (h.polyline_id != last) {
        ++distinct;
        last = h.polyline_id;
      }
    }
    CHECK(distinct == brute);
  }
}
