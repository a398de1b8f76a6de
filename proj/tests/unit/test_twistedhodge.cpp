#include <gtest/gtest.h>

#include <random>

#include "equivar/twistedhodge.hpp"
#include "support/instances.hpp"

using namespace equivar;
using namespace equivar::testing;

namespace {

struct Case {
  std::string name;
  CoverMesh mesh;
  Representation rho;
  int kernel_dim;
};

std::vector<Case> cases() {
  const CoverMesh t = build_torus(4, 4);
  const CoverMesh g = build_genus2(1);
  return {
      {"diagonal", t, diagonal_path(t).base(), 2},
      {"trivial", t, trivial_representation(Algebra::sl_real(2), t.presentation), 3},
      {"cstar", t, cstar_path(t).base(), 2},
      {"unitary", t, unitary_torus(t), 1},
      {"fuchsian", g, fuchsian_genus2(GroupKind::SL_C), 0},
  };
}

TwistedComplex complex_for(const Case& c) { return TwistedComplex(c.mesh, c.rho, harmonic(c.mesh, c.rho).map); }

}  // namespace

TEST(TwistedComplex, DSquaredVanishes) {
  std::mt19937_64 rng(1);
  for (const Case& c : cases()) {
    const TwistedComplex cx = complex_for(c);
    const TwistedCochain x = random_cochain(cx, 0, rng);
    EXPECT_LT(cx.norm(cx.d(cx.d(x))), 1e-12 * cx.norm(x)) << c.name;
  }
}

TEST(TwistedComplex, CodiffIsAdjoint) {
  std::mt19937_64 rng(2);
  for (const Case& c : cases()) {
    const TwistedComplex cx = complex_for(c);
    for (int deg : {0, 1}) {
      const TwistedCochain a = random_cochain(cx, deg, rng), b = random_cochain(cx, deg + 1, rng);
      const double lhs = cx.inner(cx.d(a), b), rhs = cx.inner(a, cx.codiff(b));
      EXPECT_LT(std::abs(lhs - rhs), 1e-10 * (1.0 + std::abs(lhs))) << c.name << " degree " << deg;
    }
  }
}

TEST(TwistedComplex, KernelDimensions) {
  for (const Case& c : cases()) EXPECT_EQ(complex_for(c).kernel_dim(), c.kernel_dim) << c.name;
}

TEST(TwistedComplex, KernelIsParallel) {
  for (const Case& c : cases()) {
    const TwistedComplex cx = complex_for(c);
    for (const TwistedCochain& xi : cx.kernel_basis()) EXPECT_LT(cx.norm(cx.d(xi)), 1e-8 * cx.norm(xi)) << c.name;
  }
}

TEST(TwistedComplex, KernelSplitsIntoCartanParts) {
  for (const Case& c : cases()) EXPECT_LT(kernel_split_residual(complex_for(c)), 1e-8) << c.name;
}

TEST(TwistedComplex, JacobiSolveInvertsOffKernel) {
  std::mt19937_64 rng(3);
  const Case c = cases()[0];
  const TwistedComplex cx = complex_for(c);
  const TwistedCochain rhs = random_cochain(cx, 0, rng);
  const TwistedCochain xi = cx.solve_jacobi(rhs);
  const TwistedCochain target = sub(rhs, cx.project_kernel(rhs));
  EXPECT_LT(cx.norm(sub(cx.jacobi(xi), target)), 1e-9 * cx.norm(rhs));
  EXPECT_LT(cx.norm(cx.project_kernel(xi)), 1e-9 * cx.norm(xi));
}

TEST(Hodge, DecompositionReconstructsAndIsOrthogonal) {
  std::mt19937_64 rng(4);
  for (const Case& c : cases()) {
    const TwistedComplex cx = complex_for(c);
    const HodgeDecomposition h = hodge_decompose(cx, random_cochain(cx, 1, rng));
    EXPECT_LT(h.reconstruction_error, 1e-8) << c.name;
    EXPECT_LT(h.max_cross_inner, 1e-8) << c.name;
    EXPECT_LT(h.harmonic_laplacian_residual, 1e-8) << c.name;
  }
}

TEST(Hodge, HarmonicRepresentativeOfCocycle) {
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = diagonal_path(t);
  const TwistedComplex cx(t, p.base(), harmonic(t, p.base()).map);
  const HarmonicForm hf = harmonic_rep(cx, path_jets(p).c);
  EXPECT_LT(hf.closed_residual, 1e-10);
  EXPECT_LT(hf.coclosed_residual, 1e-10);
  EXPECT_GT(cx.norm(hf.omega), 0.1);
  // Exact cocycles have vanishing harmonic part.
  std::mt19937_64 rng(5);
  const HarmonicForm hb = harmonic_rep(cx, coboundary(p.base(), random_element(cx.algebra(), rng)));
  EXPECT_LT(cx.norm(hb.omega), 1e-9);
}

TEST(Hodge, PrimitiveIsEquivariant) {
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = cstar_path(t);
  const TwistedComplex cx(t, p.base(), harmonic(t, p.base()).map);
  const Cocycle c = path_jets(p).c;
  const HarmonicForm hf = harmonic_rep(cx, c);
  const Primitive F = primitive(cx, hf.omega, c);
  EXPECT_LT(F.period_defect, 1e-9);
  EXPECT_LT(F.equivariance_residual, 1e-9);
  EXPECT_NEAR(equivariance_residual(cx, F.F, hf.omega, c), F.equivariance_residual, 1e-12);
}

TEST(Contraction, NilpotentOnTrivialTorus) {
  const CoverMesh t = build_torus(4, 4);
  const Representation rho = trivial_representation(Algebra::sl_real(2), t.presentation);
  const TwistedComplex cx(t, rho, constant_map(t, 2));
  const HarmonicForm hf = harmonic_rep(cx, obstruction_jet().c);
  const TwistedCochain s = contract_star(cx, hf.omega, hf.omega);
  // [e^T, e] = -h at every vertex, weighted by the a-edge mass.
  const Mat v0 = s.values[0];
  EXPECT_GT(v0.norm(), 0.0);
  const Mat unit = v0 / v0(1, 1).real();
  EXPECT_LT((unit - mat2(-1, 0, 0, 1)).norm(), 1e-10);
  for (const Mat& v : s.values) EXPECT_LT((v - v0).norm(), 1e-10);
}

TEST(Contraction, InvariantUnderMultiplicationByI) {
  std::mt19937_64 rng(6);
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = diagonal_path(t);
  const TwistedComplex cx(t, p.base(), harmonic(t, p.base()).map);
  const TwistedCochain w = random_cochain(cx, 1, rng);
  const TwistedCochain iw = scale(w, cplx(0, 1));
  EXPECT_LT(cx.norm(sub(contract_star(cx, iw, iw), contract_star(cx, w, w))), 1e-12 * (1 + cx.norm(w)));
}

TEST(Contraction, AdjointOfBracket) {
  std::mt19937_64 rng(7);
  const Case c = cases()[4];
  const TwistedComplex cx = complex_for(c);
  const TwistedCochain w = random_cochain(cx, 1, rng), xi = random_cochain(cx, 0, rng),
                       a = random_cochain(cx, 1, rng);
  const double lhs = cx.inner(bracket_edge(cx, w, xi), a);
  const double rhs = cx.inner(xi, contract_star(cx, w, a));
  EXPECT_NEAR(lhs, rhs, 1e-9 * (1.0 + std::abs(lhs)));
}

TEST(Contraction, BracketWithParallelSectionIsHarmonic) {
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = diagonal_path(t);
  const TwistedComplex cx(t, p.base(), harmonic(t, p.base()).map);
  const HarmonicForm hf = harmonic_rep(cx, path_jets(p).c);
  for (const TwistedCochain& xi : cx.kernel_basis()) {
    const TwistedCochain b = bracket_edge(cx, hf.omega, xi);
    EXPECT_LT(cx.norm(cx.d(b)), 1e-8);
    EXPECT_LT(cx.norm(cx.codiff(b)), 1e-8);
  }
}

TEST(MaurerCartan, TorusPeriodicMapDecreases) {
  double prev = 1e300;
  for (int n : {4, 8, 16}) {
    const CoverMesh t = build_torus(n, n);
    const Representation rho = trivial_representation(Algebra::sl_real(2), t.presentation);
    const double r = maurer_cartan_residual(t, rho, periodic_test_map(t));
    EXPECT_LT(r, prev) << n;
    prev = r;
  }
}

TEST(Spectrum, CsvHasHeaderAndRows) {
  const Case c = cases()[0];
  const TwistedComplex cx = complex_for(c);
  const std::string csv = spectrum_csv(cx);
  EXPECT_EQ(csv.rfind("index,eigenvalue,in_kernel\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), cx.size(0) + 1);
}
