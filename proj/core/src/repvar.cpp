#include "equivar/repvar.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace equivar {

namespace {

void require_generator(const Representation& rho, const Letter& l) {
  if (l.gen < 0 || l.gen >= rho.num_generators()) {
    throw std::invalid_argument("word uses an unknown generator");
  }
}

Jet2Elem letter_jet(const Jet2Cocycle& ck, const Representation& rho, const Letter& l) {
  require_generator(rho, l);
  // Right trivialization: (e, c, k) * (rho, 0, 0) = (rho, c, k).
  Jet2Elem x{rho.images[l.gen], ck.c.values[l.gen], ck.k[l.gen]};
  return l.exp > 0 ? x : jet2_inverse(x);
}

}  // namespace

GroupElem eval_word(const Representation& rho, const Word& w) {
  GroupElem g = rho.algebra.identity();
  for (const Letter& l : w) {
    require_generator(rho, l);
    g = g * (l.exp > 0 ? rho.images[l.gen] : GroupElem(rho.images[l.gen].inverse()));
  }
  return g;
}

AlgElem eval_cocycle(const Cocycle& c, const Representation& rho, const Word& w) {
  if (c.values.size() != rho.images.size()) {
    throw std::invalid_argument("eval_cocycle: cocycle and representation sizes differ");
  }
  GroupElem g = rho.algebra.identity();
  AlgElem acc = rho.algebra.zero();
  for (const Letter& l : w) {
    require_generator(rho, l);
    const GroupElem& x = rho.images[l.gen];
    if (l.exp > 0) {
      acc += ad_action(g, c.values[l.gen]);
      g = g * x;
    } else {
      const GroupElem xi = x.inverse();
      // c(x^-1) = -Ad_{x^-1} c(x)
      acc -= ad_action(g * xi, c.values[l.gen]);
      g = g * xi;
    }
  }
  return acc;
}

Jet2Elem eval_jet2(const Jet2Cocycle& ck, const Representation& rho, const Word& w) {
  if (ck.c.values.size() != rho.images.size() || ck.k.size() != rho.images.size()) {
    throw std::invalid_argument("eval_jet2: cocycle and representation sizes differ");
  }
  Jet2Elem acc = jet2_identity(rho.algebra.n());
  for (const Letter& l : w) acc = jet2_mul(acc, letter_jet(ck, rho, l));
  return acc;
}

std::vector<GroupElem> edge_holonomies(const CoverMesh& mesh, const Representation& rho) {
  std::vector<GroupElem> out;
  out.reserve(mesh.edges.size());
  for (const MeshEdge& e : mesh.edges) out.push_back(eval_word(rho, e.label));
  return out;
}

Cocycle zero_cocycle(const Representation& rho) {
  return Cocycle{std::vector<AlgElem>(rho.images.size(), rho.algebra.zero())};
}

Cocycle coboundary(const Representation& rho, const AlgElem& xi) {
  Cocycle c;
  for (const GroupElem& g : rho.images) c.values.push_back(xi - ad_action(g, xi));
  return c;
}

Cocycle scale(const Cocycle& c, cplx s) {
  Cocycle r = c;
  for (AlgElem& v : r.values) v *= s;
  return r;
}

Cocycle add(const Cocycle& a, const Cocycle& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("add: size mismatch");
  Cocycle r = a;
  for (size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
  return r;
}

ValidationReport validate(const Representation& rho, double tol) {
  ValidationReport r;
  r.tol = tol;
  std::ostringstream msg;
  if (rho.images.size() != rho.presentation.generators.size()) {
    r.element_ok = false;
    msg << "image count does not match generator count; ";
  }
  for (const GroupElem& g : rho.images) {
    try {
      rho.algebra.check_group(g);
    } catch (const std::exception& e) {
      r.element_ok = false;
      msg << e.what() << "; ";
    }
  }
  if (r.element_ok) {
    for (const Word& rel : rho.presentation.relators) {
      const double res = (eval_word(rho, rel) - rho.algebra.identity()).norm();
      r.rep_residuals.push_back(res);
      if (!(res < tol)) r.rep_ok = false;
    }
    if (!r.rep_ok) msg << "relator not satisfied; ";
  }
  r.message = msg.str();
  return r;
}

ValidationReport validate(const Representation& rho, const Cocycle& c, double tol) {
  ValidationReport r = validate(rho, tol);
  if (c.values.size() != rho.images.size()) {
    r.element_ok = false;
    r.message += "cocycle size mismatch; ";
    return r;
  }
  for (const AlgElem& v : c.values) {
    try {
      rho.algebra.check_element(v, 1e-10);
    } catch (const std::exception& e) {
      r.element_ok = false;
      r.message += std::string(e.what()) + "; ";
    }
  }
  if (!r.element_ok) return r;
  for (const Word& rel : rho.presentation.relators) {
    const double res = eval_cocycle(c, rho, rel).norm();
    r.cocycle_residuals.push_back(res);
    if (!(res < tol)) r.cocycle_ok = false;
  }
  if (!r.cocycle_ok) r.message += "cocycle law fails on a relator; ";
  return r;
}

ValidationReport validate(const Representation& rho, const Jet2Cocycle& ck, double tol) {
  ValidationReport r = validate(rho, ck.c, tol);
  if (ck.k.size() != rho.images.size()) {
    r.element_ok = false;
    r.message += "second jet size mismatch; ";
    return r;
  }
  for (const AlgElem& v : ck.k) {
    try {
      rho.algebra.check_element(v, 1e-10);
    } catch (const std::exception& e) {
      r.element_ok = false;
      r.message += std::string(e.what()) + "; ";
    }
  }
  if (!r.element_ok) return r;
  for (const Word& rel : rho.presentation.relators) {
    const Jet2Elem j = eval_jet2(ck, rho, rel);
    const double res = j.mu.norm();
    r.jet_residuals.push_back(res);
    if (!(res < tol)) r.jet_ok = false;
  }
  if (!r.jet_ok) r.message += "second-order cocycle law fails on a relator; ";
  return r;
}

Representation RepPath::at(double t) const {
  Representation r;
  r.algebra = algebra;
  r.presentation = presentation;
  for (const PathFactor& f : factors) {
    r.images.push_back(expm(t * f.X) * f.B * expm(-t * f.Y));
  }
  return r;
}

RepPath abelian_path(const Algebra& alg, const Presentation& pres, const std::vector<AlgElem>& logs,
                     const std::vector<AlgElem>& directions) {
  if (logs.size() != pres.generators.size() || directions.size() != logs.size()) {
    throw std::invalid_argument("abelian_path: size mismatch");
  }
  RepPath p;
  p.kind = "abelian";
  p.algebra = alg;
  p.presentation = pres;
  for (size_t i = 0; i < logs.size(); ++i) {
    if (bracket(logs[i], directions[i]).norm() > 1e-12 * (1.0 + logs[i].norm() * directions[i].norm())) {
      throw std::invalid_argument("abelian_path: log and direction do not commute");
    }
    p.factors.push_back({expm(logs[i]), directions[i], alg.zero()});
  }
  return p;
}

RepPath conjugation_path(const Representation& rho, const AlgElem& xi) {
  RepPath p;
  p.kind = "conjugation";
  p.algebra = rho.algebra;
  p.presentation = rho.presentation;
  for (const GroupElem& g : rho.images) p.factors.push_back({g, xi, xi});
  return p;
}

RepPath bending_path(const Representation& rho, cplx z) {
  if (rho.presentation.generators != std::vector<std::string>{"a1", "b1", "a2", "b2"}) {
    throw std::invalid_argument("bending_path: expects the genus-2 presentation");
  }
  Mat axis = rho.images[0].log();
  axis -= (axis.trace() / double(axis.rows())) * Mat::Identity(axis.rows(), axis.cols());
  axis /= axis.norm();
  if (!rho.algebra.is_complex()) axis = axis.real().cast<cplx>();
  const AlgElem X = z * axis;
  const AlgElem O = rho.algebra.zero();
  RepPath p;
  p.kind = "bending";
  p.algebra = rho.algebra;
  p.presentation = rho.presentation;
  p.factors = {{rho.images[0], O, O}, {rho.images[1], X, O}, {rho.images[2], X, X}, {rho.images[3], X, X}};
  return p;
}

Jet2Cocycle path_jets(const RepPath& path) {
  Jet2Cocycle ck;
  for (const PathFactor& f : path.factors) {
    const AlgElem W = ad_action(f.B, f.Y);
    // rho_t rho_0^-1 = exp(t c + t^2 k / 2) mod t^3
    ck.c.values.push_back(f.X - W);
    ck.k.push_back(bracket(W, f.X));
  }
  return ck;
}

Representation fuchsian_genus2(GroupKind kind) {
  if (kind == GroupKind::GL1_C) throw std::invalid_argument("fuchsian_genus2: needs SL(2)");
  Eigen::Matrix2cd C;
  const cplx i(0.0, 1.0);
  C << i, i, -1.0, 1.0;  // disk -> upper half-plane, z -> i(1+z)/(1-z)
  const Eigen::Matrix2cd Ci = C.inverse();
  Representation r;
  r.algebra = Algebra(kind, 2);
  r.presentation.generators = {"a1", "b1", "a2", "b2"};
  r.presentation.relators = {{{0, 1}, {1, 1}, {0, -1}, {1, -1}, {2, 1}, {3, 1}, {2, -1}, {3, -1}}};
  for (const Eigen::Matrix2cd& g : octagon_generators_disk()) {
    Eigen::Matrix2cd h = C * g * Ci;
    h /= std::sqrt(h.determinant());
    Mat real = h.real().cast<cplx>();
    r.images.push_back(real);
  }
  return r;
}

std::vector<Cocycle> cocycle_basis(const Representation& rho, double tol) {
  const Algebra& alg = rho.algebra;
  const int m = alg.dim();
  const int r = rho.num_generators();
  const int nrel = static_cast<int>(rho.presentation.relators.size());
  RMat A = RMat::Zero(std::max(1, nrel * m), r * m);
  for (int j = 0; j < r * m; ++j) {
    Cocycle c = zero_cocycle(rho);
    c.values[j / m] = alg.basis()[j % m];
    for (int i = 0; i < nrel; ++i) A.block(i * m, j, m, 1) = alg.coords(eval_cocycle(c, rho, rho.presentation.relators[i]));
  }
  Eigen::JacobiSVD<RMat> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() ? std::max(sv(0), 1.0) : 1.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * smax) ++rank;
  }
  std::vector<Cocycle> out;
  for (int j = rank; j < r * m; ++j) {
    const Eigen::VectorXd v = svd.matrixV().col(j);
    Cocycle c;
    for (int g = 0; g < r; ++g) c.values.push_back(alg.from_coords(v.segment(g * m, m)));
    out.push_back(std::move(c));
  }
  return out;
}

Representation trivial_representation(const Algebra& alg, const Presentation& pres) {
  Representation r;
  r.algebra = alg;
  r.presentation = pres;
  r.images.assign(pres.generators.size(), alg.identity());
  return r;
}

}  // namespace equivar
