#pragma once

#include <stdexcept>
#include <string>

#include "equivar/twistedhodge.hpp"

namespace equivar {

struct FirstOrderDeformation {
  HarmonicForm harmonic;
  Primitive primitive;
  TwistedCochain v;  // pointwise [p]-part of F
  double jacobi_residual = 0.0;  // |d*(dF + seed)|, the twisted J(F)
};

// With `initial`, the primitive is grown from that domain function, so two
// calls with different starts land on different points of the affine fibre.
FirstOrderDeformation first_order(const TwistedComplex& cx, const Cocycle& c,
                                  const TwistedCochain* initial = nullptr);

struct ObstructionResult {
  bool orthogonal = true;
  double defect = 0.0;
  double threshold = 0.0;
  double omega_norm2 = 0.0;
  int h_dim = 0;
  // Kernel projection of -omega^* contract omega, scaled to unit max entry;
  // zero when the defect vanishes.
  TwistedCochain witness;
};

ObstructionResult obstruction_check(const TwistedComplex& cx, const TwistedCochain& omega);

struct PsiSolution {
  TwistedCochain psi;
  TwistedCochain psi0;
  TwistedCochain eta;  // psi = psi0 + d eta, eta is F2 on the domain
  double d_residual = 0.0;       // |d psi + [omega, omega]|
  double codiff_residual = 0.0;  // |d* psi + omega^* contract omega|
};

// psi0_e = k(label) + [c(label), Ad F(v)] + [omega_e, F(u)], the value of
// dF2 + [omega, F] for the F2 that vanishes on the domain; then J(eta) =
// -omega^* contract omega - d* psi0. An obstructed input leaves a codiff
// residual equal to the obstruction defect.
PsiSolution solve_psi_unchecked(const TwistedComplex& cx, const TwistedCochain& omega,
                                const TwistedCochain& F, const Jet2Cocycle& ck);

class ObstructedError : public std::runtime_error {
 public:
  explicit ObstructedError(ObstructionResult r)
      : std::runtime_error("deformation is obstructed"), result_(std::move(r)) {}
  const ObstructionResult& result() const { return result_; }

 private:
  ObstructionResult result_;
};

// Throws ObstructedError when obstruction_check fails and
// std::invalid_argument when (c, k) does not validate.
PsiSolution solve_psi(const TwistedComplex& cx, const TwistedCochain& omega, const TwistedCochain& F,
                      const Jet2Cocycle& ck);

struct SecondOrderResiduals {
  double flatness = 0.0;       // max_e |d F2 + [omega, F] - psi|
  double equivariance1 = 0.0;  // first-order rule for F
  double d_residual = 0.0;
  double codiff_residual = 0.0;
};

// Checks a candidate pair (F, F2) against the second-order rules: psi is
// recomputed as dF2 + [omega, F] and tested against the psi equations.
SecondOrderResiduals check_second_order(const TwistedComplex& cx, const TwistedCochain& omega,
                                        const Jet2Cocycle& ck, const TwistedCochain& F,
                                        const TwistedCochain& F2, TwistedCochain* psi_out = nullptr);

struct SecondOrderDeformation {
  FirstOrderDeformation first;
  ObstructionResult obstruction;
  PsiSolution psi;
  TwistedCochain F2;
  TwistedCochain v;
  TwistedCochain w;  // F2^p + [F^k, F^p] pointwise
  SecondOrderResiduals residuals;
};

// Throws ObstructedError when the second-order deformation cannot exist.
SecondOrderDeformation second_order(const TwistedComplex& cx, const Jet2Cocycle& ck);

// eta with J(eta) = 2 omega^* contract omega; the companion pair along i c is
// (iF, -F2 - eta).
TwistedCochain companion_eta(const TwistedComplex& cx, const TwistedCochain& omega);

}  // namespace equivar
