#include <gtest/gtest.h>

#include <random>

#include "equivar/deform.hpp"
#include "support/instances.hpp"

using namespace equivar;
using namespace equivar::testing;

namespace {

TwistedComplex trivial_torus_complex(GroupKind kind) {
  const CoverMesh t = build_torus(4, 4);
  const Algebra alg = kind == GroupKind::SL_R ? Algebra::sl_real(2) : Algebra::sl_complex(2);
  return TwistedComplex(t, trivial_representation(alg, t.presentation), constant_map(t, 2));
}

TwistedComplex path_complex(const CoverMesh& mesh, const RepPath& p) {
  return TwistedComplex(mesh, p.base(), harmonic(mesh, p.base()).map);
}

}  // namespace

TEST(FirstOrder, ResidualsVanish) {
  const CoverMesh t = build_torus(4, 4);
  const CoverMesh c = build_circle(8);
  const CoverMesh g = build_genus2(1);
  const std::vector<std::pair<CoverMesh, RepPath>> paths = {
      {t, diagonal_path(t)},
      {t, cstar_path(t)},
      {c, axis_path(c)},
      {g, bending_path(fuchsian_genus2(GroupKind::SL_C), cplx(0.0, 1.0))},
  };
  for (const auto& [mesh, p] : paths) {
    const TwistedComplex cx = path_complex(mesh, p);
    const FirstOrderDeformation d = first_order(cx, path_jets(p).c);
    EXPECT_LT(d.jacobi_residual, 1e-8) << p.kind;
    EXPECT_LT(d.primitive.equivariance_residual, 1e-8) << p.kind;
    EXPECT_LT(d.harmonic.closed_residual, 1e-8) << p.kind;
    EXPECT_LT(d.harmonic.coclosed_residual, 1e-8) << p.kind;
  }
}

TEST(FirstOrder, FiberIsAffineOverKernel) {
  std::mt19937_64 rng(1);
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = diagonal_path(t);
  const TwistedComplex cx = path_complex(t, p);
  const Cocycle c = path_jets(p).c;
  const FirstOrderDeformation a = first_order(cx, c);
  const TwistedCochain start = random_cochain(cx, 0, rng);
  const FirstOrderDeformation b = first_order(cx, c, &start);
  EXPECT_LT(b.jacobi_residual, 1e-8);
  const TwistedCochain diff = sub(b.primitive.F, a.primitive.F);
  EXPECT_GT(cx.norm(diff), 1e-3);
  EXPECT_LT(cx.norm(sub(diff, cx.project_kernel(diff))), 1e-8 * cx.norm(diff));
}

TEST(Obstruction, NilpotentDirectionIsObstructed) {
  const TwistedComplex cx = trivial_torus_complex(GroupKind::SL_R);
  const Jet2Cocycle ck = obstruction_jet();
  const HarmonicForm hf = harmonic_rep(cx, ck.c);
  const ObstructionResult r = obstruction_check(cx, hf.omega);
  EXPECT_FALSE(r.orthogonal);
  EXPECT_NEAR(r.defect, std::sqrt(2.0), 1e-8);
  EXPECT_EQ(r.h_dim, 3);
  for (const Mat& w : r.witness.values) EXPECT_LT((w - mat2(1, 0, 0, -1)).norm(), 1e-8);
  EXPECT_THROW(second_order(cx, ck), ObstructedError);
  try {
    second_order(cx, ck);
  } catch (const ObstructedError& e) {
    EXPECT_NEAR(e.result().defect, r.defect, 1e-12);
  }
}

TEST(Obstruction, CartanLineIsUnobstructed) {
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = diagonal_path(t);
  const TwistedComplex cx = path_complex(t, p);
  const Jet2Cocycle ck = path_jets(p);
  const ObstructionResult r = obstruction_check(cx, harmonic_rep(cx, ck.c).omega);
  EXPECT_TRUE(r.orthogonal);
  EXPECT_LT(r.defect, r.threshold);
  EXPECT_NO_THROW(second_order(cx, ck));
}

TEST(Obstruction, InvariantUnderMultiplicationByI) {
  const TwistedComplex cx = trivial_torus_complex(GroupKind::SL_C);
  Cocycle c = obstruction_jet().c;
  c.values[1] = mat2(0.3, cplx(0.2, -0.5), cplx(0.7, 0.1), -0.3);
  const TwistedCochain w = harmonic_rep(cx, c).omega;
  const TwistedCochain iw = harmonic_rep(cx, scale(c, cplx(0, 1))).omega;
  EXPECT_NEAR(obstruction_check(cx, w).defect, obstruction_check(cx, iw).defect, 1e-12);
}

TEST(Obstruction, AgreesWithUncheckedSolve) {
  const CoverMesh t = build_torus(3, 3);
  int obstructed = 0;
  for (const BankInstance& b : obstruction_bank(t, 10, 7)) {
    const TwistedComplex cx = path_complex(t, b.path);
    const Jet2Cocycle ck = path_jets(b.path);
    const FirstOrderDeformation d = first_order(cx, ck.c);
    const ObstructionResult r = obstruction_check(cx, d.harmonic.omega);
    const PsiSolution s = solve_psi_unchecked(cx, d.harmonic.omega, d.primitive.F, ck);
    const bool solvable = s.codiff_residual <= std::max(1e-7, 1e-7 * r.omega_norm2);
    EXPECT_EQ(r.orthogonal, solvable) << b.label;
    if (!r.orthogonal) {
      ++obstructed;
      EXPECT_NEAR(s.codiff_residual, r.defect, 1e-7 * (1 + r.defect)) << b.label;
    }
  }
  EXPECT_GT(obstructed, 0);
}

TEST(SecondOrder, ResidualsVanish) {
  const CoverMesh t = build_torus(4, 4);
  const CoverMesh g = build_genus2(1);
  const std::vector<std::pair<CoverMesh, RepPath>> paths = {
      {t, diagonal_path(t)},
      {t, cstar_path(t)},
      {g, bending_path(fuchsian_genus2(GroupKind::SL_C), cplx(0.4, 1.0))},
  };
  for (const auto& [mesh, p] : paths) {
    const TwistedComplex cx = path_complex(mesh, p);
    const SecondOrderDeformation s = second_order(cx, path_jets(p));
    EXPECT_LT(s.psi.d_residual, 1e-7) << p.kind;
    EXPECT_LT(s.psi.codiff_residual, 1e-7) << p.kind;
    EXPECT_LT(s.residuals.flatness, 1e-7) << p.kind;
    EXPECT_LT(s.residuals.equivariance1, 1e-7) << p.kind;
    EXPECT_LT(s.residuals.d_residual, 1e-7) << p.kind;
    EXPECT_LT(s.residuals.codiff_residual, 1e-7) << p.kind;
  }
}

TEST(SecondOrder, NonUniquenessIsParametrizedByKernel) {
  std::mt19937_64 rng(2);
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = diagonal_path(t);
  const TwistedComplex cx = path_complex(t, p);
  const Jet2Cocycle ck = path_jets(p);
  const SecondOrderDeformation s = second_order(cx, ck);
  const TwistedCochain& omega = s.first.harmonic.omega;
  const std::vector<TwistedCochain> ker = cx.kernel_basis();
  ASSERT_FALSE(ker.empty());
  const TwistedCochain xi = scale(ker[0], 0.7);
  const TwistedCochain eta = scale(ker.back(), -0.4);
  // (F + xi, F2 + [F, xi] + eta) solves the same system.
  TwistedCochain F2 = s.F2;
  for (size_t v = 0; v < F2.values.size(); ++v) {
    F2.values[v] += bracket(s.first.primitive.F.values[v], xi.values[v]) + eta.values[v];
  }
  const SecondOrderResiduals r = check_second_order(cx, omega, ck, add(s.first.primitive.F, xi), F2);
  EXPECT_LT(r.flatness, 1e-7);
  EXPECT_LT(r.equivariance1, 1e-7);
  EXPECT_LT(r.d_residual, 1e-7);
  EXPECT_LT(r.codiff_residual, 1e-7);
}

TEST(SecondOrder, CompanionAlongIc) {
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = cstar_path(t);
  const TwistedComplex cx = path_complex(t, p);
  const Jet2Cocycle ck = path_jets(p);
  const SecondOrderDeformation s = second_order(cx, ck);
  const TwistedCochain& omega = s.first.harmonic.omega;
  const TwistedCochain eta = companion_eta(cx, omega);
  Jet2Cocycle ick;
  ick.c = scale(ck.c, cplx(0, 1));
  for (const Mat& k : ck.k) ick.k.push_back(-k);
  const SecondOrderResiduals r = check_second_order(cx, scale(omega, cplx(0, 1)), ick,
                                                    scale(s.first.primitive.F, cplx(0, 1)),
                                                    sub(scale(s.F2, -1.0), eta));
  EXPECT_LT(r.flatness, 1e-7);
  EXPECT_LT(r.equivariance1, 1e-7);
  EXPECT_LT(r.d_residual, 1e-7);
  EXPECT_LT(r.codiff_residual, 1e-7);
}

TEST(SecondOrder, RejectsInvalidJet) {
  const TwistedComplex cx = trivial_torus_complex(GroupKind::SL_R);
  Jet2Cocycle ck;
  ck.c.values = {mat2(1, 0, 0, -1), mat2(0, 1, 0, 0)};
  ck.k = {Mat::Zero(2, 2), Mat::Zero(2, 2)};
  const HarmonicForm hf = harmonic_rep(cx, ck.c);
  const FirstOrderDeformation d = first_order(cx, ck.c);
  EXPECT_THROW(solve_psi(cx, hf.omega, d.primitive.F, ck), std::invalid_argument);
}
