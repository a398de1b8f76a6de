#pragma once

#include <string>
#include <vector>

#include "equivar/deform.hpp"
#include "equivar/harmonicflow.hpp"

namespace equivar {

// The discrete energy is 1/2 sum w1 dist^2 = 2 sum w1 |beta|^2, so its
// derivatives carry a factor kVariationScale over the trace-form integrals.
inline constexpr double kVariationScale = 1.0 / (kMcScale * kMcScale);

// sum_e w1 <a_e, b_e> at the edge sources.
double edge_inner(const TwistedComplex& cx, const TwistedCochain& a, const TwistedCochain& b);
TwistedCochain beta_cochain(const TwistedComplex& cx);

// d/dt E along a deformation with harmonic form omega.
double first_variation(const TwistedComplex& cx, const TwistedCochain& omega);
// d^2/dt^2 E with psi from solve_psi.
double second_variation(const TwistedComplex& cx, const TwistedCochain& psi, const TwistedCochain& omega);

// Raw trace-form integral sum w1 (<psi, beta> + |omega^p|^2).
double second_variation_integral(const TwistedComplex& cx, const TwistedCochain& psi,
                                 const TwistedCochain& omega);

struct PshResult {
  double defect = 0.0;
  double omega_norm2 = 0.0;
  double second_c = 0.0;   // raw integral along c
  double second_ic = 0.0;  // raw integral along i c, from an independent psi solve
  double companion_gap = 0.0;  // |psi_ic - (-psi - d eta)| after removing d(ker J)
};

// |s(c) + s(ic) - |omega|^2| for raw second-variation integrals s. The second
// jet along i c is -k. Requires a complex group; throws ObstructedError when
// either direction is obstructed.
PshResult psh_defect(const TwistedComplex& cx, const Jet2Cocycle& ck);

// max over the basis of |sum w1 <omega, beta>| / (|omega| |beta|); directions
// with vanishing omega are skipped.
double critical_scan(const TwistedComplex& cx, const std::vector<Cocycle>& basis);

struct FdParams {
  std::vector<double> steps{1e-2, 5e-3, 2.5e-3};
  FlowParams flow;
};

struct FdEstimate {
  std::vector<double> steps;
  std::vector<double> d1;  // central differences per step
  std::vector<double> d2;
  double d1_richardson = 0.0;
  double d2_richardson = 0.0;
  double e0 = 0.0;
  bool all_converged = true;
};

// Central differences of t -> E(rho_t) with warm-started flows from f0, and
// two-level Richardson extrapolation over steps halving at each level.
FdEstimate fd_energy_derivatives(const CoverMesh& mesh, const RepPath& path, const EquivariantMap& f0,
                                 const FdParams& params = {});

struct VariationReport {
  double first_analytic = 0.0;
  double second_analytic = 0.0;
  FdEstimate fd;
  double first_rel_error = 0.0;
  double second_rel_error = 0.0;
  double first_abs_error = 0.0;
  double second_abs_error = 0.0;
  double psi_d_residual = 0.0;
  double psi_codiff_residual = 0.0;
  bool obstructed = false;
};

// Full pipeline along an analytic path: harmonic map at t = 0, harmonic
// forms, psi, analytic variations and the finite-difference oracle.
VariationReport variation_report(const CoverMesh& mesh, const RepPath& path, const FdParams& params = {});

double relative_error(double analytic, double reference);

}  // namespace equivar
