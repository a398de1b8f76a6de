#include "equivar/deform.hpp"

#include <algorithm>
#include <cmath>

namespace equivar {

FirstOrderDeformation first_order(const TwistedComplex& cx, const Cocycle& c, const TwistedCochain* initial) {
  FirstOrderDeformation out;
  out.harmonic = harmonic_rep(cx, c);
  if (initial == nullptr) {
    out.primitive = primitive(cx, out.harmonic.omega, c);
  } else {
    // Correct the start by the least-squares primitive of the remaining error.
    const TwistedCochain target = sub(sub(out.harmonic.omega, seed_cochain(cx, c)), cx.d(*initial));
    out.primitive.F = add(*initial, cx.solve_jacobi(cx.codiff(target)));
    out.primitive.period_defect = cx.norm(sub(cx.d(out.primitive.F), sub(out.harmonic.omega, seed_cochain(cx, c))));
    out.primitive.equivariance_residual = equivariance_residual(cx, out.primitive.F, out.harmonic.omega, c);
  }
  out.v = pointwise_p(cx, out.primitive.F);
  // F is harmonic in the twisted sense: d*(dF + seed) = d* omega.
  out.jacobi_residual = cx.norm(cx.codiff(add(cx.d(out.primitive.F), seed_cochain(cx, c))));
  return out;
}

ObstructionResult obstruction_check(const TwistedComplex& cx, const TwistedCochain& omega) {
  ObstructionResult r;
  const TwistedCochain cs = contract_star(cx, omega, omega);
  const TwistedCochain proj = cx.project_kernel(cs);
  r.defect = cx.norm(proj);
  r.omega_norm2 = cx.inner(omega, omega);
  // The floor only matters when omega itself is at rounding level.
  r.threshold = std::max(1e-7 * r.omega_norm2, 1e-20);
  r.orthogonal = r.defect < r.threshold;
  r.h_dim = cx.kernel_dim();
  r.witness = cx.zero(0);
  const double m = max_abs(proj);
  if (m > 0.0 && !r.orthogonal) r.witness = scale(proj, -1.0 / m);
  return r;
}

PsiSolution solve_psi_unchecked(const TwistedComplex& cx, const TwistedCochain& omega, const TwistedCochain& F,
                                const Jet2Cocycle& ck) {
  const CoverMesh& mesh = cx.mesh();
  PsiSolution s;
  s.psi0 = cx.zero(1);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const MeshEdge& ed = mesh.edges[e];
    const Jet2Elem j = eval_jet2(ck, cx.rep(), ed.label);
    s.psi0.values[e] = j.mu + bracket(j.xi, ad_action(j.g, F.values[ed.v])) + bracket(omega.values[e], F.values[ed.u]);
  }
  const TwistedCochain cs = contract_star(cx, omega, omega);
  const TwistedCochain rhs = sub(scale(cs, -1.0), cx.codiff(s.psi0));
  s.eta = cx.solve_jacobi(rhs);
  s.psi = add(s.psi0, cx.d(s.eta));
  s.d_residual = cx.norm(add(cx.d(s.psi), bracket_wedge(cx, omega, omega)));
  s.codiff_residual = cx.norm(add(cx.codiff(s.psi), cs));
  return s;
}

PsiSolution solve_psi(const TwistedComplex& cx, const TwistedCochain& omega, const TwistedCochain& F,
                      const Jet2Cocycle& ck) {
  const ValidationReport vr = validate(cx.rep(), ck);
  if (!vr.ok()) throw std::invalid_argument("solve_psi: inconsistent (c, k): " + vr.message);
  ObstructionResult ob = obstruction_check(cx, omega);
  if (!ob.orthogonal) throw ObstructedError(std::move(ob));
  return solve_psi_unchecked(cx, omega, F, ck);
}

SecondOrderResiduals check_second_order(const TwistedComplex& cx, const TwistedCochain& omega,
                                        const Jet2Cocycle& ck, const TwistedCochain& F,
                                        const TwistedCochain& F2, TwistedCochain* psi_out) {
  const CoverMesh& mesh = cx.mesh();
  SecondOrderResiduals r;
  // F2 across a labeled edge: F2(g x) = Ad_g F2(x) + [c(g), Ad_g F(x)] + k(g).
  TwistedCochain psi = cx.zero(1);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const MeshEdge& ed = mesh.edges[e];
    const Jet2Elem j = eval_jet2(ck, cx.rep(), ed.label);
    const AlgElem F2_target = ad_action(j.g, F2.values[ed.v]) + bracket(j.xi, ad_action(j.g, F.values[ed.v])) + j.mu;
    psi.values[e] = F2_target - F2.values[ed.u] + bracket(omega.values[e], F.values[ed.u]);
  }
  r.equivariance1 = equivariance_residual(cx, F, omega, ck.c);
  const TwistedCochain cs = contract_star(cx, omega, omega);
  r.d_residual = cx.norm(add(cx.d(psi), bracket_wedge(cx, omega, omega)));
  r.codiff_residual = cx.norm(add(cx.codiff(psi), cs));
  if (psi_out != nullptr) *psi_out = psi;
  return r;
}

SecondOrderDeformation second_order(const TwistedComplex& cx, const Jet2Cocycle& ck) {
  const ValidationReport vr = validate(cx.rep(), ck);
  if (!vr.ok()) throw std::invalid_argument("second_order: inconsistent (c, k): " + vr.message);
  SecondOrderDeformation out;
  out.first = first_order(cx, ck.c);
  out.obstruction = obstruction_check(cx, out.first.harmonic.omega);
  if (!out.obstruction.orthogonal) throw ObstructedError(out.obstruction);
  const TwistedCochain& omega = out.first.harmonic.omega;
  const TwistedCochain& F = out.first.primitive.F;
  out.psi = solve_psi_unchecked(cx, omega, F, ck);
  out.F2 = out.psi.eta;
  out.v = out.first.v;
  out.w = cx.zero(0);
  for (int v = 0; v < cx.mesh().num_vertices(); ++v) {
    const Mat& P = cx.map().values[v];
    const CartanParts f1 = cartan_project(P, F.values[v]);
    out.w.values[v] = cartan_project(P, out.F2.values[v]).p + bracket(f1.k, f1.p);
  }
  TwistedCochain psi_check;
  out.residuals = check_second_order(cx, omega, ck, F, out.F2, &psi_check);
  out.residuals.flatness = 0.0;
  for (size_t e = 0; e < psi_check.values.size(); ++e) {
    out.residuals.flatness = std::max(out.residuals.flatness, (psi_check.values[e] - out.psi.psi.values[e]).norm());
  }
  return out;
}

TwistedCochain companion_eta(const TwistedComplex& cx, const TwistedCochain& omega) {
  return cx.solve_jacobi(scale(contract_star(cx, omega, omega), 2.0));
}

}  // namespace equivar
