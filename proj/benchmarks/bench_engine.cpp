#include <benchmark/benchmark.h>

#include "graded/constructions.hpp"
#include "graded/random.hpp"

using namespace graded;

namespace {

Connection sample_connection(int dim, int degree, std::uint64_t seed) {
  InstanceGenerator G(seed);
  Algebroid A = Algebroid::make(G.valid_algebroid_spec(dim, 2)).verify();
  return G.connection(A, G.bundle_chart(dim, degree), 1);
}

}  // namespace

static void BM_StructureCheck(benchmark::State& state) {
  InstanceGenerator G(1);
  Algebroid A = Algebroid::make(G.algebroid_spec(static_cast<int>(state.range(0)), 3, 2));
  for (auto _ : state) benchmark::DoNotOptimize(check_structure(A).passed());
}
BENCHMARK(BM_StructureCheck)->Arg(1)->Arg(2)->Arg(3);

static void BM_Curvature(benchmark::State& state) {
  Connection C = sample_connection(2, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(curvature(C).is_zero());
}
BENCHMARK(BM_Curvature)->DenseRange(1, 3);

static void BM_ChristoffelCurvature(benchmark::State& state) {
  Connection C = sample_connection(2, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(christoffel_curvature(C).is_zero());
}
BENCHMARK(BM_ChristoffelCurvature)->DenseRange(1, 3);

static void BM_TransformLaw(benchmark::State& state) {
  Connection C = sample_connection(2, 2, 3);
  InstanceGenerator G(4);
  TransitionMap T = G.triangular_transition(C.product(), C.product(), static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(transform_christoffels(C, T).size());
}
BENCHMARK(BM_TransformLaw)->Arg(1)->Arg(3)->Arg(5);

static void BM_HigherTangentLift(benchmark::State& state) {
  InstanceGenerator G(5);
  ChartPtr M = InstanceGenerator::base_chart(2);
  TransitionMap T = G.triangular_transition(M, M, 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(higher_tangent_transition(T, static_cast<int>(state.range(0))).name);
}
BENCHMARK(BM_HigherTangentLift)->DenseRange(1, 4);

static void BM_T2MCurvatureCheck(benchmark::State& state) {
  ChartPtr M = ChartBuilder("M", 1).base("x").base("y").build();
  AffineConnectionData g = AffineConnectionData::formal(M);
  for (auto _ : state) benchmark::DoNotOptimize(t2m_curvature_check(g).checks.size());
}
BENCHMARK(BM_T2MCurvatureCheck)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
