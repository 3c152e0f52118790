#include "afp/hadamard.hpp"
#include "afp/hull.hpp"
#include "afp/immersion.hpp"
#include "afp/normal_flow.hpp"
#include "afp/patch_distance.hpp"
#include "afp/plateau.hpp"
#include "afp/test_surfaces.hpp"

#include <benchmark/benchmark.h>

using namespace afp;

namespace {

void BM_GeodesicLog(benchmark::State& state) {
  const ModelSpace s(3);
  Vec d = Vec::Zero(4);
  d[1] = 0.6;
  d[2] = 0.8;
  const HyperboloidPoint y = s.geodesic(s.tangent(s.origin(), d), 1.7);
  for (auto _ : state) benchmark::DoNotOptimize(s.log(s.origin(), y));
}
BENCHMARK(BM_GeodesicLog);

void BM_FundamentalForms(benchmark::State& state) {
  const ModelSpace s(3);
  const ParametricPatch p = surfaces::equidistant(s, 33, 0.5, 0.5);
  const std::size_t v = p.interior_vertices()[p.interior_vertices().size() / 2];
  for (auto _ : state) benchmark::DoNotOptimize(fundamental_forms(p, v));
}
BENCHMARK(BM_FundamentalForms);

void BM_JacobiTransfer(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_transfer(1.0, 0.5, 3.0, 1.0));
}
BENCHMARK(BM_JacobiTransfer);

void BM_PhiInf(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(phi_inf(0.4, k, 0.5));
}
BENCHMARK(BM_PhiInf)->Arg(2)->Arg(3);

void BM_BuildHull(benchmark::State& state) {
  const IdealBoundarySet set = IdealCurve::parse("wavy:3:0.3").sample(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_hull(set));
}
BENCHMARK(BM_BuildHull)->Arg(64)->Arg(256);

void BM_PlateauSolve(benchmark::State& state) {
  PlateauProblem pr;
  pr.curve = IdealCurve::parse("wavy:3:0.1");
  pr.n_r = 8;
  pr.n_theta = 16;
  for (auto _ : state) benchmark::DoNotOptimize(solve(pr, InitSpec::parse("cone")));
}
BENCHMARK(BM_PlateauSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
