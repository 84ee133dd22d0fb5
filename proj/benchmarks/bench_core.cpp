#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "xwalk/changedet.hpp"
#include "xwalk/postprocess.hpp"
#include "xwalk/spatial_index.hpp"
#include "xwalk/synth.hpp"

namespace {

using namespace xwalk;

std::vector<DetectionRecord> random_detections(std::uint64_t seed, int n,
                                               double extent, Epoch epoch) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, extent);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::vector<DetectionRecord> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back({"D" + std::to_string(i),
                   {coord(rng), coord(rng)},
                   conf(rng),
                   epoch,
                   {}});
  }
  return out;
}

void bm_point_index_build(benchmark::State& state) {
  const auto dets =
      random_detections(1, static_cast<int>(state.range(0)), 10000, Epoch::Old);
  std::vector<std::pair<std::int64_t, WorldPoint>> entries;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    entries.emplace_back(static_cast<std::int64_t>(i), dets[i].pos);
  }
  for (auto _ : state) {
    PointIndex ix(entries);
    benchmark::DoNotOptimize(ix);
  }
}
BENCHMARK(bm_point_index_build)->Arg(1000)->Arg(10000);

void bm_query_nearest(benchmark::State& state) {
  const auto dets =
      random_detections(2, static_cast<int>(state.range(0)), 10000, Epoch::Old);
  std::vector<std::pair<std::int64_t, WorldPoint>> entries;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    entries.emplace_back(static_cast<std::int64_t>(i), dets[i].pos);
  }
  const PointIndex ix(entries);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(0.0, 10000.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ix.query_nearest({coord(rng), coord(rng)}));
  }
}
BENCHMARK(bm_query_nearest)->Arg(1000)->Arg(10000);

void bm_detect_new(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto olds = random_detections(4, n, 10000, Epoch::Old);
  const auto news = random_detections(5, n, 10000, Epoch::New);
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect_new(news, olds, 36.0));
  }
}
BENCHMARK(bm_detect_new)->Arg(1000)->Arg(10000);

void bm_dedup(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto dets = random_detections(6, n, 3000, Epoch::New);
  std::vector<ChangeRecord> changes;
  changes.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    ChangeRecord c;
    c.change_id = "C" + std::to_string(i + 1);
    c.pos = dets[i].pos;
    c.confidence = dets[i].confidence;
    changes.push_back(c);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(dedup(changes, 24.0));
  }
}
BENCHMARK(bm_dedup)->Arg(1000)->Arg(4000);

void bm_derive_intersections(benchmark::State& state) {
  ScenarioSpec spec;
  spec.seed = 7;
  const int lines = static_cast<int>(state.range(0));
  spec.road_count = lines;
  spec.grid_spacing_ft = 500;
  const double side = 500.0 * (lines / 2 + 1);
  spec.extent = {0, 0, side, side};
  const Scenario s = gen_scenario(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(derive_intersections(s.truth.roads, 1.0));
  }
}
BENCHMARK(bm_derive_intersections)->Arg(20)->Arg(60);

void bm_mask_filter(benchmark::State& state) {
  ScenarioSpec spec;
  spec.seed = 8;
  spec.road_count = 40;
  spec.grid_spacing_ft = 500;
  spec.extent = {0, 0, 10500, 10500};
  spec.crosswalks_per_intersection = 2;
  const Scenario s = gen_scenario(spec);
  const auto dets = random_detections(9, static_cast<int>(state.range(0)),
                                      10500, Epoch::Old);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mask_filter(dets, s.truth.roads, 100.0));
  }
}
BENCHMARK(bm_mask_filter)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
