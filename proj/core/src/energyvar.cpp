#include "equivar/energyvar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace equivar {

double edge_inner(const TwistedComplex& cx, const TwistedCochain& a, const TwistedCochain& b) {
  if (a.degree != 1 || b.degree != 1) throw std::invalid_argument("edge_inner: needs 1-cochains");
  double acc = 0.0;
  for (int e = 0; e < cx.mesh().num_edges(); ++e) {
    const MeshEdge& ed = cx.mesh().edges[e];
    acc += ed.w1 * inner_at(cx.map().values[ed.u], a.values[e], b.values[e]);
  }
  return acc;
}

TwistedCochain beta_cochain(const TwistedComplex& cx) {
  return TwistedCochain{1, edge_betas(cx.mesh(), cx.rep(), cx.map())};
}

double first_variation(const TwistedComplex& cx, const TwistedCochain& omega) {
  return kVariationScale * edge_inner(cx, omega, beta_cochain(cx));
}

double second_variation_integral(const TwistedComplex& cx, const TwistedCochain& psi, const TwistedCochain& omega) {
  const TwistedCochain wp = pointwise_p(cx, omega);
  return edge_inner(cx, psi, beta_cochain(cx)) + edge_inner(cx, wp, wp);
}

double second_variation(const TwistedComplex& cx, const TwistedCochain& psi, const TwistedCochain& omega) {
  return kVariationScale * second_variation_integral(cx, psi, omega);
}

PshResult psh_defect(const TwistedComplex& cx, const Jet2Cocycle& ck) {
  if (!cx.algebra().is_complex()) throw std::invalid_argument("psh_defect: needs a complex group");
  const cplx i(0.0, 1.0);
  PshResult r;
  const FirstOrderDeformation d1 = first_order(cx, ck.c);
  const TwistedCochain& omega = d1.harmonic.omega;
  r.omega_norm2 = edge_inner(cx, omega, omega);
  const PsiSolution psi = solve_psi(cx, omega, d1.primitive.F, ck);

  Jet2Cocycle ick{scale(ck.c, i), {}};
  for (const AlgElem& k : ck.k) ick.k.push_back(-k);
  const FirstOrderDeformation d1i = first_order(cx, ick.c);
  const TwistedCochain& omega_i = d1i.harmonic.omega;
  const PsiSolution psi_i = solve_psi(cx, omega_i, d1i.primitive.F, ick);

  r.second_c = second_variation_integral(cx, psi.psi, omega);
  r.second_ic = second_variation_integral(cx, psi_i.psi, omega_i);
  r.defect = std::abs(r.second_c + r.second_ic - r.omega_norm2);

  const TwistedCochain eta = companion_eta(cx, omega);
  const TwistedCochain companion = sub(scale(psi.psi, -1.0), cx.d(eta));
  r.companion_gap = cx.norm(sub(psi_i.psi, companion));
  return r;
}

double critical_scan(const TwistedComplex& cx, const std::vector<Cocycle>& basis) {
  const TwistedCochain beta = beta_cochain(cx);
  const double nb = std::sqrt(std::max(0.0, edge_inner(cx, beta, beta)));
  double worst = 0.0;
  for (const Cocycle& c : basis) {
    const HarmonicForm h = harmonic_rep(cx, c);
    const double nw = std::sqrt(std::max(0.0, edge_inner(cx, h.omega, h.omega)));
    const double ns = std::sqrt(std::max(0.0, edge_inner(cx, h.seed, h.seed)));
    if (nw <= 1e-9 * std::max(1.0, ns) || nb == 0.0) continue;
    worst = std::max(worst, std::abs(edge_inner(cx, h.omega, beta)) / (nw * nb));
  }
  return worst;
}

FdEstimate fd_energy_derivatives(const CoverMesh& mesh, const RepPath& path, const EquivariantMap& f0,
                                 const FdParams& params) {
  if (params.steps.size() != 3) throw std::invalid_argument("fd_energy_derivatives: needs three steps");
  FdEstimate est;
  est.steps = params.steps;
  auto energy_at = [&](double t) {
    const FlowResult r = flow(mesh, path.at(t), f0, params.flow);
    if (!r.report.converged) est.all_converged = false;
    return r.report.energy;
  };
  est.e0 = energy_at(0.0);
  for (double h : params.steps) {
    const double ep = energy_at(h), em = energy_at(-h);
    est.d1.push_back((ep - em) / (2.0 * h));
    est.d2.push_back((ep - 2.0 * est.e0 + em) / (h * h));
  }
  // Errors are even in h; with halving steps the first level removes h^2 and
  // the second h^4.
  auto richardson = [&](const std::vector<double>& d) {
    const double q1 = std::pow(params.steps[0] / params.steps[1], 2.0);
    const double q2 = std::pow(params.steps[1] / params.steps[2], 2.0);
    const double r1 = (q1 * d[1] - d[0]) / (q1 - 1.0);
    const double r2 = (q2 * d[2] - d[1]) / (q2 - 1.0);
    const double q = q1 * q2;
    return (q * r2 - r1) / (q - 1.0);
  };
  est.d1_richardson = richardson(est.d1);
  est.d2_richardson = richardson(est.d2);
  return est;
}

double relative_error(double analytic, double reference) {
  return std::abs(analytic - reference) / std::max(std::abs(analytic), 1e-12);
}

VariationReport variation_report(const CoverMesh& mesh, const RepPath& path, const FdParams& params) {
  VariationReport rep;
  const Representation rho0 = path.base();
  const RepEnergy base = energy_of_rep(mesh, rho0, params.flow, 1);
  if (!base.best.report.converged) throw std::runtime_error("variation_report: harmonic map did not converge");
  const TwistedComplex cx(mesh, rho0, base.best.map);
  const Jet2Cocycle ck = path_jets(path);
  const FirstOrderDeformation d1 = first_order(cx, ck.c);
  const TwistedCochain& omega = d1.harmonic.omega;
  rep.first_analytic = first_variation(cx, omega);
  const ObstructionResult ob = obstruction_check(cx, omega);
  rep.obstructed = !ob.orthogonal;
  const PsiSolution psi = solve_psi_unchecked(cx, omega, d1.primitive.F, ck);
  rep.psi_d_residual = psi.d_residual;
  rep.psi_codiff_residual = psi.codiff_residual;
  rep.second_analytic = second_variation(cx, psi.psi, omega);
  rep.fd = fd_energy_derivatives(mesh, path, base.best.map, params);
  rep.first_rel_error = relative_error(rep.first_analytic, rep.fd.d1_richardson);
  rep.second_rel_error = relative_error(rep.second_analytic, rep.fd.d2_richardson);
  rep.first_abs_error = std::abs(rep.first_analytic - rep.fd.d1_richardson);
  rep.second_abs_error = std::abs(rep.second_analytic - rep.fd.d2_richardson);
  return rep;
}

}  // namespace equivar
