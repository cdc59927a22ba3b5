// Parallel kernels against their serial reference twins.

#include <benchmark/benchmark.h>

#include "lslr/geocoder.hpp"
#include "lslr/partitioning.hpp"
#include "lslr/pipeline.hpp"
#include "lslr/policy_sim.hpp"
#include "lslr/prioritization.hpp"
#include "lslr/scoring.hpp"
#include "lslr/synth.hpp"

using namespace lslr;

namespace {

struct Fixture {
  SyntheticCity city;
  Snapshot snap;
  ScoringInputs scoring;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    CityOptions opt;
    opt.seed = 2;
    opt.horizontal_streets = 20;
    opt.vertical_streets = 20;
    out.city = generate_city(opt);
    SnapshotInputs in;
    in.parcels = out.city.parcels;
    in.lines = out.city.lines;
    in.children = out.city.children;
    in.centerlines = out.city.centerlines;
    MockGeocoder geo(out.city.gazetteer);
    out.snap = build_snapshot(in, geo);
    out.scoring = make_scoring_inputs(out.snap.parcels, out.snap.lines, out.snap.children,
                                      out.snap.join.children_by_parcel, out.snap.config);
    return out;
  }();
  return f;
}

template <bool Parallel>
void BM_ScoreProjects(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto projects = f.snap.projects;
    if constexpr (Parallel) {
      score_projects(projects, f.scoring, f.snap.config);
    } else {
      reference::score_projects(projects, f.scoring, f.snap.config);
    }
    benchmark::DoNotOptimize(projects.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.snap.projects.size()));
}

template <bool Parallel>
void BM_AssignParcels(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto a = Parallel ? assign_parcels(f.snap.parcels, f.snap.segments)
                      : reference::assign_parcels(f.snap.parcels, f.snap.segments);
    benchmark::DoNotOptimize(a.segment_of.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.snap.parcels.size()));
}

template <bool Parallel>
void BM_GapBenchmark(benchmark::State& state) {
  const auto instances = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto s = Parallel ? gap_benchmark(instances, 7) : reference::gap_benchmark(instances, 7);
    benchmark::DoNotOptimize(s.median);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Simulate(benchmark::State& state) {
  const auto& f = fixture();
  const std::vector<Policy> policies{UniformRandom{1}, ByLengthExcavated{}, ByLeadPerMeter{}, WeightedByExposure{2},
                                     ByBcr{}, ByValue{}};
  const auto iterations = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto sims = Parallel ? simulate(policies, f.snap.projects, 100, iterations)
                         : reference::simulate(policies, f.snap.projects, 100, iterations);
    benchmark::DoNotOptimize(sims.data());
  }
}

}  // namespace

BENCHMARK(BM_ScoreProjects<false>)->Name("score_projects/serial")->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_ScoreProjects<true>)->Name("score_projects/parallel")->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_AssignParcels<false>)->Name("assign_parcels/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AssignParcels<true>)->Name("assign_parcels/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GapBenchmark<false>)->Name("gap_benchmark/serial")->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GapBenchmark<true>)->Name("gap_benchmark/parallel")->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Simulate<false>)->Name("simulate/serial")->Arg(50)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Simulate<true>)->Name("simulate/parallel")->Arg(50)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
