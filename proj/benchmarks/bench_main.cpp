#include <benchmark/benchmark.h>

#include "finsler/convex_body.hpp"
#include "finsler/crofton.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/rigidity.hpp"

using namespace finsler;

namespace {

MetricField bump_field() { return busemann_metric(perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2)); }

void BM_BusemannFiber(benchmark::State& state) {
  const MetricField f = bump_field();
  const Vec3 x = Vec3(0.2, 0.3, 0.9).normalized();
  const Vec3 v = Vec3(1, 0, 0).cross(x).normalized();
  for (auto _ : state) benchmark::DoNotOptimize(f(x, v));
}
BENCHMARK(BM_BusemannFiber);

void BM_HtVolume(benchmark::State& state) {
  const MetricField f = bump_field();
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ht_volume(f, WholeSphere{level}));
}
BENCHMARK(BM_HtVolume)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_CroftonLength(benchmark::State& state) {
  const CroftonDensity m = perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(crofton_length(m, SphereCurve::latitude(40).curve).length);
}
BENCHMARK(BM_CroftonLength)->Unit(benchmark::kMillisecond);

void BM_GeodesicTrace(benchmark::State& state) {
  const MetricField f = bump_field();
  for (auto _ : state) {
    benchmark::DoNotOptimize(geodesic_trace(f, Vec3(1, 0, 0), Vec3(0, 1, 0.3), 1.0).states.size());
  }
}
BENCHMARK(BM_GeodesicTrace)->Unit(benchmark::kMillisecond);

void BM_BlaschkeTetrahedron(benchmark::State& state) {
  const ConvexBody t = regular_tetrahedron();
  for (auto _ : state) benchmark::DoNotOptimize(blaschke_body(t).iterations);
}
BENCHMARK(BM_BlaschkeTetrahedron)->Unit(benchmark::kMillisecond);

void BM_SymmetrizationGap(benchmark::State& state) {
  const auto corpus = brunn_minkowski_corpus(2, 11);
  for (auto _ : state) benchmark::DoNotOptimize(symmetrization_gap(corpus[0].body).relative_gap);
}
BENCHMARK(BM_SymmetrizationGap)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
