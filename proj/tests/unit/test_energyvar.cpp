#include <gtest/gtest.h>

#include <cmath>

#include "equivar/energyvar.hpp"
#include "support/instances.hpp"

using namespace equivar;
using namespace equivar::testing;

namespace {

FdParams tight() {
  FdParams p;
  p.flow.tol = 1e-11;
  p.flow.max_iter = 20000;
  return p;
}

}  // namespace

TEST(FirstVariation, AxisFamilyClosedForm) {
  // E(s) = 4 s^2 on the circle for a -> diag(e^s, e^-s) in this normalisation.
  const CoverMesh c = build_circle(8);
  const double s = 0.7;
  const RepPath p = axis_path(c, s);
  const TwistedComplex cx(c, p.base(), harmonic(c, p.base()).map);
  const FirstOrderDeformation d = first_order(cx, path_jets(p).c);
  EXPECT_NEAR(first_variation(cx, d.harmonic.omega), 8.0 * s, 1e-7);
}

TEST(FirstVariation, MatchesFiniteDifferences) {
  const CoverMesh t = build_torus(4, 4);
  for (const RepPath& p : {diagonal_path(t), cstar_path(t)}) {
    const VariationReport r = variation_report(t, p, tight());
    EXPECT_FALSE(r.obstructed);
    EXPECT_TRUE(r.fd.all_converged);
    EXPECT_LT(r.first_rel_error, 1e-3) << p.kind;
  }
}

TEST(FirstVariation, ConjugationDirectionIsFlat) {
  std::mt19937_64 rng(1);
  const Representation rho = fuchsian_genus2(GroupKind::SL_C);
  const CoverMesh g = build_genus2(1);
  const TwistedComplex cx(g, rho, harmonic(g, rho).map);
  const Cocycle c = coboundary(rho, random_element(rho.algebra, rng));
  const FirstOrderDeformation d = first_order(cx, c);
  EXPECT_LT(std::abs(first_variation(cx, d.harmonic.omega)), 1e-8);
}

TEST(SecondVariation, DiagonalMatchesFiniteDifferences) {
  const CoverMesh t = build_torus(4, 4);
  const VariationReport r = variation_report(t, diagonal_path(t), tight());
  EXPECT_LT(r.second_rel_error, 1e-2);
  EXPECT_LT(r.psi_d_residual, 1e-7);
  EXPECT_LT(r.psi_codiff_residual, 1e-7);
}

TEST(SecondVariation, AxisFamilyClosedForm) {
  const CoverMesh c = build_circle(8);
  const RepPath p = axis_path(c, 0.7);
  const TwistedComplex cx(c, p.base(), harmonic(c, p.base()).map);
  const SecondOrderDeformation s = second_order(cx, path_jets(p));
  EXPECT_NEAR(second_variation(cx, s.psi.psi, s.first.harmonic.omega), 8.0, 1e-6);
}

TEST(Psh, CstarDefectVanishes) {
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = cstar_path(t);
  const TwistedComplex cx(t, p.base(), harmonic(t, p.base()).map);
  const PshResult r = psh_defect(cx, path_jets(p));
  EXPECT_GT(r.omega_norm2, 0.1);
  EXPECT_LT(r.defect, 1e-10);
}

TEST(Psh, DiagonalDefectSmall) {
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = diagonal_path(t);
  const TwistedComplex cx(t, p.base(), harmonic(t, p.base()).map);
  const PshResult r = psh_defect(cx, path_jets(p));
  EXPECT_LT(r.defect, 0.02 * r.omega_norm2);
  EXPECT_LT(r.companion_gap, 1e-7);
}

TEST(Psh, RealGroupRejected) {
  const CoverMesh c = build_circle(8);
  const RepPath p = axis_path(c);
  const TwistedComplex cx(c, p.base(), harmonic(c, p.base()).map);
  EXPECT_THROW(psh_defect(cx, path_jets(p)), std::invalid_argument);
}

TEST(CriticalScan, UnitaryIsCritical) {
  const CoverMesh t = build_torus(4, 4);
  const Representation rho = unitary_torus(t);
  const TwistedComplex cx(t, rho, harmonic(t, rho).map);
  EXPECT_LT(critical_scan(cx, cocycle_basis(rho)), 1e-9);
}

TEST(CriticalScan, HyperbolicAxisIsNotCritical) {
  const CoverMesh c = build_circle(8);
  const Representation rho = hyperbolic_circle(c, 2.0);
  const TwistedComplex cx(c, rho, harmonic(c, rho).map);
  EXPECT_GT(critical_scan(cx, cocycle_basis(rho)), 0.1);
}

TEST(CriticalScan, CstarScalingIsNotCritical) {
  const CoverMesh t = build_torus(4, 4);
  const Representation rho = cstar_path(t).base();
  const TwistedComplex cx(t, rho, harmonic(t, rho).map);
  EXPECT_GT(critical_scan(cx, cocycle_basis(rho)), 0.1);
}

TEST(FiniteDifferences, RichardsonOnQuadratic) {
  // E is exactly quadratic along the axis family, so every step agrees.
  const CoverMesh c = build_circle(8);
  const RepPath p = axis_path(c, 0.3);
  const FdEstimate fd = fd_energy_derivatives(c, p, harmonic(c, p.base()).map, tight());
  ASSERT_EQ(fd.d1.size(), 3u);
  for (double d1 : fd.d1) EXPECT_NEAR(d1, 2.4, 1e-5);
  EXPECT_NEAR(fd.d2_richardson, 8.0, 1e-3);
}

TEST(RelativeError, GuardsSmallReference) {
  EXPECT_NEAR(relative_error(1.01, 1.0), 0.01 / 1.01, 1e-12);
  EXPECT_TRUE(std::isfinite(relative_error(1e-3, 0.0)));
}
