#include <benchmark/benchmark.h>

#include <cmath>

#include "equivar/energyvar.hpp"

using namespace equivar;

namespace {

Representation fuchsian_sl_c() { return fuchsian_genus2(GroupKind::SL_C); }

void BM_FlowGenus2(benchmark::State& state) {
  const CoverMesh mesh = build_genus2(static_cast<int>(state.range(0)));
  const Representation rho = fuchsian_sl_c();
  for (auto _ : state) {
    const FlowResult r = flow(mesh, rho, constant_map(mesh, 2));
    benchmark::DoNotOptimize(r.report.energy);
  }
  state.counters["vertices"] = mesh.num_vertices();
}
BENCHMARK(BM_FlowGenus2)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_FlowTorus(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CoverMesh mesh = build_torus(n, n);
  const Algebra alg = Algebra::sl_complex(2);
  Mat a = Mat::Zero(2, 2), b = Mat::Zero(2, 2);
  a(0, 0) = cplx(0.3, 0.2), a(1, 1) = -a(0, 0);
  b(0, 0) = cplx(0.1, -0.4), b(1, 1) = -b(0, 0);
  Representation rho = trivial_representation(alg, mesh.presentation);
  rho.images = {expm(a), expm(b)};
  for (auto _ : state) {
    const FlowResult r = flow(mesh, rho, random_map(mesh, alg, 1));
    benchmark::DoNotOptimize(r.report.energy);
  }
  state.counters["vertices"] = mesh.num_vertices();
}
BENCHMARK(BM_FlowTorus)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_HodgeAssembly(benchmark::State& state) {
  const CoverMesh mesh = build_genus2(static_cast<int>(state.range(0)));
  const Representation rho = fuchsian_sl_c();
  const EquivariantMap f = flow(mesh, rho, constant_map(mesh, 2)).map;
  for (auto _ : state) {
    TwistedComplex cx(mesh, rho, f);
    benchmark::DoNotOptimize(cx.kernel_dim());
  }
  state.counters["vertices"] = mesh.num_vertices();
}
BENCHMARK(BM_HodgeAssembly)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_JacobiSolve(benchmark::State& state) {
  const CoverMesh mesh = build_genus2(static_cast<int>(state.range(0)));
  const Representation rho = fuchsian_sl_c();
  const TwistedComplex cx(mesh, rho, flow(mesh, rho, constant_map(mesh, 2)).map);
  Vec v(cx.size(0));
  for (int i = 0; i < v.size(); ++i) v[i] = std::sin(0.7 * i + 0.1);
  const TwistedCochain rhs = cx.from_vec(0, v);
  for (auto _ : state) {
    const TwistedCochain xi = cx.solve_jacobi(rhs);
    benchmark::DoNotOptimize(xi.values.data());
  }
}
BENCHMARK(BM_JacobiSolve)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_SecondOrderBending(benchmark::State& state) {
  const CoverMesh mesh = build_genus2(1);
  const Representation rho = fuchsian_sl_c();
  const TwistedComplex cx(mesh, rho, flow(mesh, rho, constant_map(mesh, 2)).map);
  const Jet2Cocycle ck = path_jets(bending_path(rho, cplx(0.0, 1.0)));
  for (auto _ : state) {
    const SecondOrderDeformation s = second_order(cx, ck);
    benchmark::DoNotOptimize(s.psi.codiff_residual);
  }
}
BENCHMARK(BM_SecondOrderBending)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
