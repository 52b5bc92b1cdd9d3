#include <benchmark/benchmark.h>

#include "qlp/bartnik.hpp"

using namespace qlp;

namespace {

std::shared_ptr<const ConformalProfile> schwarzschild() {
  static const auto p = ConformalProfile::build(make_reference(ReferenceKind::Schwarzschild, 1.0));
  return p;
}

StarSurface bumpy(std::size_t n) {
  return perturbed_sphere(schwarzschild(), std::make_shared<const SphereGrid>(n, 2 * n), 3.2, {{2, 0, 0.05}, {3, 2, 0.02}});
}

void BM_ProfileBuild(benchmark::State& state) {
  const auto ref = make_reference(ReferenceKind::ReissnerNordstrom, 1.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(ConformalProfile::build(ref));
}
BENCHMARK(BM_ProfileBuild)->Unit(benchmark::kMillisecond);

void BM_SpectralDerivatives(benchmark::State& state) {
  const auto s = bumpy(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(s.grid().derivatives(s.G(), 3));
}
BENCHMARK(BM_SpectralDerivatives)->Arg(16)->Arg(32)->Arg(64);

void BM_SurfaceGeometry(benchmark::State& state) {
  const auto s = bumpy(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(surface_geometry(s, true));
}
BENCHMARK(BM_SurfaceGeometry)->Arg(16)->Arg(32)->Arg(64);

void BM_FlowStep(benchmark::State& state) {
  const auto s = bumpy(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(step_flow(s, 0.01));
}
BENCHMARK(BM_FlowStep)->Arg(16)->Arg(32)->Arg(64);

void BM_URate(benchmark::State& state) {
  const auto s = bumpy(std::size_t(state.range(0)));
  const auto g = surface_geometry(s, false);
  const Field w = Field::Constant(Eigen::Index(s.grid().size()), 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(u_rate(s.grid(), g, w));
}
BENCHMARK(BM_URate)->Arg(16)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
