#pragma once

#include <string>
#include <vector>

#include "equivar/harmonicflow.hpp"
#include "equivar/meshcover.hpp"
#include "equivar/repvar.hpp"

namespace equivar {

// Values per cell: vertices (degree 0), edges (1) or faces (2). Edge values
// live at the edge source, face values at the face base vertex.
struct TwistedCochain {
  int degree = 0;
  std::vector<AlgElem> values;
};

// One side of a face walk: the face value receives sign * Ad_T(value(edge)).
struct SideTransport {
  int edge = 0;
  double sign = 1.0;
  GroupElem T;
};

std::vector<std::vector<SideTransport>> face_side_transports(const CoverMesh& mesh,
                                                             const std::vector<GroupElem>& hol);

// Twisted cochain complex of Ad(rho) with the fibre metric of f. Operators are
// assembled densely on real coordinates at construction.
class TwistedComplex {
 public:
  TwistedComplex(const CoverMesh& mesh, const Representation& rho, const EquivariantMap& f);

  const CoverMesh& mesh() const { return mesh_; }
  const Representation& rep() const { return rho_; }
  const EquivariantMap& map() const { return f_; }
  const Algebra& algebra() const { return rho_.algebra; }
  const std::vector<GroupElem>& holonomies() const { return hol_; }
  const std::vector<std::vector<SideTransport>>& face_sides() const { return sides_; }

  int cells(int degree) const;
  int size(int degree) const { return cells(degree) * algebra().dim(); }
  TwistedCochain zero(int degree) const;
  Vec to_vec(const TwistedCochain& x) const;
  TwistedCochain from_vec(int degree, const Vec& v) const;

  const RMat& d_matrix(int degree) const;     // degree 0 or 1
  const RMat& gram_matrix(int degree) const;  // block diagonal

  TwistedCochain d(const TwistedCochain& x) const;
  TwistedCochain codiff(const TwistedCochain& x) const;
  TwistedCochain jacobi(const TwistedCochain& x) const;
  double inner(const TwistedCochain& a, const TwistedCochain& b) const;
  double norm(const TwistedCochain& a) const;

  // Generalized eigenpairs of J, modes orthonormal for the vertex Gram matrix.
  const Vec& jacobi_spectrum() const { return spectrum_; }
  const RMat& jacobi_modes() const { return modes_; }
  double kernel_cutoff() const { return cutoff_; }
  int kernel_dim() const { return kernel_dim_; }
  std::vector<TwistedCochain> kernel_basis() const;
  TwistedCochain project_kernel(const TwistedCochain& x) const;
  // Minimum-norm solution of J(xi) = rhs - (kernel part of rhs).
  TwistedCochain solve_jacobi(const TwistedCochain& rhs) const;

  // dd* + d*d on 1-cochains as a real matrix acting on coordinates.
  RMat hodge_laplacian1() const;

 private:
  void check(const TwistedCochain& x, int degree) const;

  CoverMesh mesh_;
  Representation rho_;
  EquivariantMap f_;
  std::vector<GroupElem> hol_;
  std::vector<std::vector<SideTransport>> sides_;
  RMat D0_, D1_, G0_, G1_, G2_;
  std::vector<RMat> G0_blocks_, G1_blocks_, G2_blocks_;
  Vec spectrum_;
  RMat modes_;
  double cutoff_ = 0.0;
  int kernel_dim_ = 0;
};

// Face values sum_{i<j} [a_i, b_j] over transported, signed side values.
TwistedCochain bracket_wedge(const TwistedComplex& cx, const TwistedCochain& a,
                             const TwistedCochain& b);
// [omega, xi]_e = [omega_e, xi(source)].
TwistedCochain bracket_edge(const TwistedComplex& cx, const TwistedCochain& omega,
                            const TwistedCochain& xi);
// Adjoint of xi -> [omega, xi]: (1/w0) sum over edges at v of w1 [omega_e^*, alpha_e].
TwistedCochain contract_star(const TwistedComplex& cx, const TwistedCochain& omega,
                             const TwistedCochain& alpha);

TwistedCochain add(const TwistedCochain& a, const TwistedCochain& b);
TwistedCochain sub(const TwistedCochain& a, const TwistedCochain& b);
TwistedCochain scale(const TwistedCochain& a, cplx s);
TwistedCochain pointwise_k(const TwistedComplex& cx, const TwistedCochain& x);
TwistedCochain pointwise_p(const TwistedComplex& cx, const TwistedCochain& x);
double max_abs(const TwistedCochain& a);

// omega0_e = c(label_e): the closed cochain of the primitive that vanishes on
// the fundamental domain.
TwistedCochain seed_cochain(const TwistedComplex& cx, const Cocycle& c);

struct HarmonicForm {
  TwistedCochain omega;
  TwistedCochain seed;
  TwistedCochain xi;  // omega = seed - d xi
  double closed_residual = 0.0;
  double coclosed_residual = 0.0;
};
HarmonicForm harmonic_rep(const TwistedComplex& cx, const Cocycle& c);

// F with dF = omega and F(g x) = Ad_g F(x) + c(g); least squares in the
// complement of ker J, so a period mismatch shows up as a defect.
struct Primitive {
  TwistedCochain F;
  double period_defect = 0.0;
  double equivariance_residual = 0.0;
};
Primitive primitive(const TwistedComplex& cx, const TwistedCochain& omega, const Cocycle& c);
// max_e |Ad_{rho(e)} F(v) + c(label) - F(u) - omega_e|.
double equivariance_residual(const TwistedComplex& cx, const TwistedCochain& F,
                             const TwistedCochain& omega, const Cocycle& c);

struct HodgeDecomposition {
  TwistedCochain exact;
  TwistedCochain coexact;
  TwistedCochain harmonic;
  double reconstruction_error = 0.0;
  double max_cross_inner = 0.0;  // largest normalized pairwise Gram inner product
  double harmonic_laplacian_residual = 0.0;
};
HodgeDecomposition hodge_decompose(const TwistedComplex& cx, const TwistedCochain& alpha);

// max over a kernel basis of |J(xi_k)| and |J(xi_p)| relative to |xi|.
double kernel_split_residual(const TwistedComplex& cx);

// |d beta - [beta, beta]| in the face Gram norm, with beta the edge logarithms of f.
double maurer_cartan_residual(const CoverMesh& mesh, const Representation& rho,
                              const EquivariantMap& f);

// CSV with columns index,eigenvalue,in_kernel.
std::string spectrum_csv(const TwistedComplex& cx);

}  // namespace equivar
