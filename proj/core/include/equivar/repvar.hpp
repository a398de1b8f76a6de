#pragma once

#include <string>
#include <vector>

#include "equivar/liealg.hpp"
#include "equivar/meshcover.hpp"

namespace equivar {

struct Representation {
  Algebra algebra = Algebra::sl_real(2);
  Presentation presentation;
  std::vector<GroupElem> images;  // one per generator

  int num_generators() const { return static_cast<int>(images.size()); }
};

struct Cocycle {
  std::vector<AlgElem> values;  // c(generator)
};

struct Jet2Cocycle {
  Cocycle c;
  std::vector<AlgElem> k;
};

GroupElem eval_word(const Representation& rho, const Word& w);
AlgElem eval_cocycle(const Cocycle& c, const Representation& rho, const Word& w);
// (c + t k) evaluated on a word through the second-jet group law.
Jet2Elem eval_jet2(const Jet2Cocycle& ck, const Representation& rho, const Word& w);

// rho(label) for every mesh edge.
std::vector<GroupElem> edge_holonomies(const CoverMesh& mesh, const Representation& rho);

Cocycle zero_cocycle(const Representation& rho);
Cocycle coboundary(const Representation& rho, const AlgElem& xi);
Cocycle scale(const Cocycle& c, cplx s);
Cocycle add(const Cocycle& a, const Cocycle& b);

struct ValidationReport {
  double tol = 1e-8;
  std::vector<double> rep_residuals;
  std::vector<double> cocycle_residuals;
  std::vector<double> jet_residuals;
  bool element_ok = true;
  bool rep_ok = true;
  bool cocycle_ok = true;
  bool jet_ok = true;
  std::string message;

  bool ok() const { return element_ok && rep_ok && cocycle_ok && jet_ok; }
};

ValidationReport validate(const Representation& rho, double tol = 1e-8);
ValidationReport validate(const Representation& rho, const Cocycle& c, double tol = 1e-8);
ValidationReport validate(const Representation& rho, const Jet2Cocycle& ck, double tol = 1e-8);

// Closed-form path t -> rho_t with rho_t(gen) = exp(t X) B exp(-t Y).
struct PathFactor {
  GroupElem B;
  AlgElem X;
  AlgElem Y;
};

struct RepPath {
  std::string kind;  // "abelian", "conjugation", "bending" or "custom"
  Algebra algebra = Algebra::sl_real(2);
  Presentation presentation;
  std::vector<PathFactor> factors;

  Representation at(double t) const;
  Representation base() const { return at(0.0); }
};

// exp(A_i + t D_i) with [A_i, D_i] = 0 for every generator.
RepPath abelian_path(const Algebra& alg, const Presentation& pres, const std::vector<AlgElem>& logs,
                     const std::vector<AlgElem>& directions);
RepPath conjugation_path(const Representation& rho, const AlgElem& xi);
// Bending of a genus-2 representation along the curve a1, with multiplier z
// applied to the unit axis of rho(a1).
RepPath bending_path(const Representation& rho, cplx z);

// First jet c = rho' rho^-1 and right-trivialized second jet k at t = 0.
Jet2Cocycle path_jets(const RepPath& path);

// Standard Fuchsian representation of the genus-2 surface group in SL(2,R),
// or its image in SL(2,C).
Representation fuchsian_genus2(GroupKind kind = GroupKind::SL_R);

// Basis of Z^1(Gamma, g) by generator values, from the null space of the
// linearized relator conditions.
std::vector<Cocycle> cocycle_basis(const Representation& rho, double tol = 1e-10);

Representation trivial_representation(const Algebra& alg, const Presentation& pres);

}  // namespace equivar
