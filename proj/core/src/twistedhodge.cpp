#include "equivar/twistedhodge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace equivar {

namespace {

RMat block_diag(const std::vector<RMat>& blocks, int dim) {
  const int n = static_cast<int>(blocks.size()) * dim;
  RMat out = RMat::Zero(n, n);
  for (size_t i = 0; i < blocks.size(); ++i) out.block(i * dim, i * dim, dim, dim) = blocks[i];
  return out;
}

Vec apply_block_inverse(const std::vector<RMat>& blocks, int dim, const Vec& x) {
  Vec out(x.size());
  for (size_t i = 0; i < blocks.size(); ++i) {
    out.segment(i * dim, dim) = blocks[i].llt().solve(x.segment(i * dim, dim));
  }
  return out;
}

}  // namespace

std::vector<std::vector<SideTransport>> face_side_transports(const CoverMesh& mesh,
                                                             const std::vector<GroupElem>& hol) {
  const int n = hol.empty() ? 1 : static_cast<int>(hol[0].rows());
  std::vector<std::vector<SideTransport>> out;
  out.reserve(mesh.faces.size());
  for (const MeshFace& face : mesh.faces) {
    std::vector<SideTransport> sides;
    GroupElem T = Mat::Identity(n, n);
    for (const FaceSide& s : face.boundary) {
      const GroupElem& g = hol[s.edge];
      if (s.forward) {
        sides.push_back({s.edge, 1.0, T});
        T = T * g;
      } else {
        T = T * g.inverse();
        sides.push_back({s.edge, -1.0, T});
      }
    }
    out.push_back(std::move(sides));
  }
  return out;
}

TwistedComplex::TwistedComplex(const CoverMesh& mesh, const Representation& rho, const EquivariantMap& f)
    : mesh_(mesh), rho_(rho), f_(f) {
  check_map(mesh_, rho_.algebra, f_);
  hol_ = edge_holonomies(mesh_, rho_);
  sides_ = face_side_transports(mesh_, hol_);
  const Algebra& alg = rho_.algebra;
  const int m = alg.dim();
  const int nv = mesh_.num_vertices(), ne = mesh_.num_edges(), nf = mesh_.num_faces();

  D0_ = RMat::Zero(ne * m, nv * m);
  for (int e = 0; e < ne; ++e) {
    const MeshEdge& ed = mesh_.edges[e];
    D0_.block(e * m, ed.v * m, m, m) += alg.ad_matrix(hol_[e]);
    D0_.block(e * m, ed.u * m, m, m) -= RMat::Identity(m, m);
  }
  D1_ = RMat::Zero(nf * m, ne * m);
  for (int fi = 0; fi < nf; ++fi) {
    for (const SideTransport& s : sides_[fi]) {
      D1_.block(fi * m, s.edge * m, m, m) += s.sign * alg.ad_matrix(s.T);
    }
  }

  std::vector<RMat> point_gram(nv);
  for (int v = 0; v < nv; ++v) point_gram[v] = alg.gram(f_.values[v]);
  for (int v = 0; v < nv; ++v) G0_blocks_.push_back(mesh_.vertices[v].w0 * point_gram[v]);
  for (int e = 0; e < ne; ++e) G1_blocks_.push_back(mesh_.edges[e].w1 * point_gram[mesh_.edges[e].u]);
  for (int fi = 0; fi < nf; ++fi) {
    G2_blocks_.push_back(point_gram[mesh_.face_base_vertex(fi)] / mesh_.faces[fi].area);
  }
  G0_ = block_diag(G0_blocks_, m);
  G1_ = block_diag(G1_blocks_, m);
  G2_ = block_diag(G2_blocks_, m);

  const RMat K = D0_.transpose() * G1_ * D0_;
  Eigen::GeneralizedSelfAdjointEigenSolver<RMat> es(0.5 * (K + K.transpose()), G0_);
  if (es.info() != Eigen::Success) throw std::runtime_error("Jacobi eigen-solve failed");
  spectrum_ = es.eigenvalues();
  modes_ = es.eigenvectors();
  const double lmax = spectrum_.size() ? std::max(spectrum_.cwiseAbs().maxCoeff(), 1e-300) : 1.0;
  cutoff_ = 1e-9 * lmax;
  kernel_dim_ = 0;
  for (int i = 0; i < spectrum_.size(); ++i) {
    if (spectrum_(i) <= cutoff_) ++kernel_dim_;
  }
}

int TwistedComplex::cells(int degree) const {
  switch (degree) {
    case 0: return mesh_.num_vertices();
    case 1: return mesh_.num_edges();
    case 2: return mesh_.num_faces();
    default: throw std::invalid_argument("cochain degree must be 0, 1 or 2");
  }
}

void TwistedComplex::check(const TwistedCochain& x, int degree) const {
  if (x.degree != degree) throw std::invalid_argument("cochain has the wrong degree");
  if (static_cast<int>(x.values.size()) != cells(degree)) {
    throw std::invalid_argument("cochain size does not match the mesh");
  }
}

TwistedCochain TwistedComplex::zero(int degree) const {
  return TwistedCochain{degree, std::vector<AlgElem>(cells(degree), algebra().zero())};
}

Vec TwistedComplex::to_vec(const TwistedCochain& x) const {
  check(x, x.degree);
  const int m = algebra().dim();
  Vec out(size(x.degree));
  for (size_t i = 0; i < x.values.size(); ++i) out.segment(i * m, m) = algebra().coords(x.values[i]);
  return out;
}

TwistedCochain TwistedComplex::from_vec(int degree, const Vec& v) const {
  if (v.size() != size(degree)) throw std::invalid_argument("coordinate vector has the wrong size");
  const int m = algebra().dim();
  TwistedCochain out{degree, {}};
  out.values.reserve(cells(degree));
  for (int i = 0; i < cells(degree); ++i) out.values.push_back(algebra().from_coords(v.segment(i * m, m)));
  return out;
}

const RMat& TwistedComplex::d_matrix(int degree) const {
  if (degree == 0) return D0_;
  if (degree == 1) return D1_;
  throw std::invalid_argument("d_matrix: degree must be 0 or 1");
}

const RMat& TwistedComplex::gram_matrix(int degree) const {
  if (degree == 0) return G0_;
  if (degree == 1) return G1_;
  if (degree == 2) return G2_;
  throw std::invalid_argument("gram_matrix: degree must be 0, 1 or 2");
}

TwistedCochain TwistedComplex::d(const TwistedCochain& x) const {
  check(x, x.degree);
  return from_vec(x.degree + 1, d_matrix(x.degree) * to_vec(x));
}

TwistedCochain TwistedComplex::codiff(const TwistedCochain& x) const {
  check(x, x.degree);
  const int m = algebra().dim();
  if (x.degree == 1) {
    return from_vec(0, apply_block_inverse(G0_blocks_, m, D0_.transpose() * (G1_ * to_vec(x))));
  }
  if (x.degree == 2) {
    return from_vec(1, apply_block_inverse(G1_blocks_, m, D1_.transpose() * (G2_ * to_vec(x))));
  }
  throw std::invalid_argument("codiff: degree must be 1 or 2");
}

TwistedCochain TwistedComplex::jacobi(const TwistedCochain& x) const {
  check(x, 0);
  return codiff(d(x));
}

double TwistedComplex::inner(const TwistedCochain& a, const TwistedCochain& b) const {
  check(b, a.degree);
  return to_vec(a).dot(gram_matrix(a.degree) * to_vec(b));
}

double TwistedComplex::norm(const TwistedCochain& a) const {
  return std::sqrt(std::max(0.0, inner(a, a)));
}

std::vector<TwistedCochain> TwistedComplex::kernel_basis() const {
  std::vector<TwistedCochain> out;
  for (int i = 0; i < spectrum_.size(); ++i) {
    if (spectrum_(i) <= cutoff_) out.push_back(from_vec(0, modes_.col(i)));
  }
  return out;
}

TwistedCochain TwistedComplex::project_kernel(const TwistedCochain& x) const {
  check(x, 0);
  const Vec gx = G0_ * to_vec(x);
  Vec out = Vec::Zero(size(0));
  for (int i = 0; i < spectrum_.size(); ++i) {
    if (spectrum_(i) <= cutoff_) out += modes_.col(i).dot(gx) * modes_.col(i);
  }
  return from_vec(0, out);
}

TwistedCochain TwistedComplex::solve_jacobi(const TwistedCochain& rhs) const {
  check(rhs, 0);
  const Vec gr = G0_ * to_vec(rhs);
  Vec out = Vec::Zero(size(0));
  for (int i = 0; i < spectrum_.size(); ++i) {
    if (spectrum_(i) > cutoff_) out += (modes_.col(i).dot(gr) / spectrum_(i)) * modes_.col(i);
  }
  return from_vec(0, out);
}

RMat TwistedComplex::hodge_laplacian1() const {
  const int m = algebra().dim();
  RMat G0inv = RMat::Zero(size(0), size(0));
  for (size_t i = 0; i < G0_blocks_.size(); ++i) G0inv.block(i * m, i * m, m, m) = G0_blocks_[i].inverse();
  RMat G1inv = RMat::Zero(size(1), size(1));
  for (size_t i = 0; i < G1_blocks_.size(); ++i) G1inv.block(i * m, i * m, m, m) = G1_blocks_[i].inverse();
  return D0_ * G0inv * D0_.transpose() * G1_ + G1inv * D1_.transpose() * G2_ * D1_;
}

TwistedCochain bracket_wedge(const TwistedComplex& cx, const TwistedCochain& a, const TwistedCochain& b) {
  if (a.degree != 1 || b.degree != 1) throw std::invalid_argument("bracket_wedge: needs 1-cochains");
  TwistedCochain out = cx.zero(2);
  for (int fi = 0; fi < cx.mesh().num_faces(); ++fi) {
    const auto& sides = cx.face_sides()[fi];
    std::vector<AlgElem> ta, tb;
    for (const SideTransport& s : sides) {
      ta.push_back(s.sign * ad_action(s.T, a.values[s.edge]));
      tb.push_back(s.sign * ad_action(s.T, b.values[s.edge]));
    }
    AlgElem acc = cx.algebra().zero();
    AlgElem prefix = cx.algebra().zero();
    for (size_t j = 0; j < sides.size(); ++j) {
      acc += bracket(prefix, tb[j]);
      prefix += ta[j];
    }
    out.values[fi] = acc;
  }
  return out;
}

TwistedCochain bracket_edge(const TwistedComplex& cx, const TwistedCochain& omega, const TwistedCochain& xi) {
  if (omega.degree != 1 || xi.degree != 0) throw std::invalid_argument("bracket_edge: degree mismatch");
  TwistedCochain out = cx.zero(1);
  for (int e = 0; e < cx.mesh().num_edges(); ++e) {
    out.values[e] = bracket(omega.values[e], xi.values[cx.mesh().edges[e].u]);
  }
  return out;
}

TwistedCochain contract_star(const TwistedComplex& cx, const TwistedCochain& omega, const TwistedCochain& alpha) {
  if (omega.degree != 1 || alpha.degree != 1) throw std::invalid_argument("contract_star: needs 1-cochains");
  TwistedCochain out = cx.zero(0);
  for (int e = 0; e < cx.mesh().num_edges(); ++e) {
    const MeshEdge& ed = cx.mesh().edges[e];
    const Mat& P = cx.map().values[ed.u];
    out.values[ed.u] += ed.w1 * bracket(adjoint_at(P, omega.values[e]), alpha.values[e]);
  }
  for (int v = 0; v < cx.mesh().num_vertices(); ++v) out.values[v] /= cx.mesh().vertices[v].w0;
  return out;
}

TwistedCochain add(const TwistedCochain& a, const TwistedCochain& b) {
  if (a.degree != b.degree || a.values.size() != b.values.size()) {
    throw std::invalid_argument("add: cochain mismatch");
  }
  TwistedCochain out = a;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

TwistedCochain sub(const TwistedCochain& a, const TwistedCochain& b) { return add(a, scale(b, -1.0)); }

TwistedCochain scale(const TwistedCochain& a, cplx s) {
  TwistedCochain out = a;
  for (AlgElem& v : out.values) v *= s;
  return out;
}

namespace {

const Mat& point_of(const TwistedComplex& cx, int degree, int cell) {
  const CoverMesh& m = cx.mesh();
  if (degree == 0) return cx.map().values[cell];
  if (degree == 1) return cx.map().values[m.edges[cell].u];
  return cx.map().values[m.face_base_vertex(cell)];
}

}  // namespace

TwistedCochain pointwise_k(const TwistedComplex& cx, const TwistedCochain& x) {
  TwistedCochain out = x;
  for (size_t i = 0; i < x.values.size(); ++i) {
    out.values[i] = cartan_project(point_of(cx, x.degree, static_cast<int>(i)), x.values[i]).k;
  }
  return out;
}

TwistedCochain pointwise_p(const TwistedComplex& cx, const TwistedCochain& x) {
  TwistedCochain out = x;
  for (size_t i = 0; i < x.values.size(); ++i) {
    out.values[i] = cartan_project(point_of(cx, x.degree, static_cast<int>(i)), x.values[i]).p;
  }
  return out;
}

double max_abs(const TwistedCochain& a) {
  double m = 0.0;
  for (const AlgElem& v : a.values) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

TwistedCochain seed_cochain(const TwistedComplex& cx, const Cocycle& c) {
  TwistedCochain out = cx.zero(1);
  for (int e = 0; e < cx.mesh().num_edges(); ++e) {
    out.values[e] = eval_cocycle(c, cx.rep(), cx.mesh().edges[e].label);
  }
  return out;
}

HarmonicForm harmonic_rep(const TwistedComplex& cx, const Cocycle& c) {
  const ValidationReport vr = validate(cx.rep(), c);
  if (!vr.ok()) throw std::invalid_argument("harmonic_rep: invalid cocycle: " + vr.message);
  HarmonicForm h;
  h.seed = seed_cochain(cx, c);
  h.xi = cx.solve_jacobi(cx.codiff(h.seed));
  h.omega = sub(h.seed, cx.d(h.xi));
  const double scale_ref = std::max(1.0, cx.norm(h.seed));
  h.closed_residual = cx.norm(cx.d(h.omega)) / scale_ref;
  h.coclosed_residual = cx.norm(cx.codiff(h.omega)) / scale_ref;
  return h;
}

double equivariance_residual(const TwistedComplex& cx, const TwistedCochain& F, const TwistedCochain& omega,
                             const Cocycle& c) {
  double m = 0.0;
  for (int e = 0; e < cx.mesh().num_edges(); ++e) {
    const MeshEdge& ed = cx.mesh().edges[e];
    const AlgElem r = ad_action(cx.holonomies()[e], F.values[ed.v]) +
                      eval_cocycle(c, cx.rep(), ed.label) - F.values[ed.u] - omega.values[e];
    m = std::max(m, r.norm());
  }
  return m;
}

Primitive primitive(const TwistedComplex& cx, const TwistedCochain& omega, const Cocycle& c) {
  if (omega.degree != 1) throw std::invalid_argument("primitive: omega must be a 1-cochain");
  Primitive p;
  const TwistedCochain target = sub(omega, seed_cochain(cx, c));
  p.F = cx.solve_jacobi(cx.codiff(target));
  p.period_defect = cx.norm(sub(cx.d(p.F), target));
  p.equivariance_residual = equivariance_residual(cx, p.F, omega, c);
  return p;
}

HodgeDecomposition hodge_decompose(const TwistedComplex& cx, const TwistedCochain& alpha) {
  if (alpha.degree != 1) throw std::invalid_argument("hodge_decompose: needs a 1-cochain");
  HodgeDecomposition h;
  h.exact = cx.d(cx.solve_jacobi(cx.codiff(alpha)));

  // Coexact part: G1-orthogonal projection onto the range of G1^-1 D1^T.
  const RMat& D1 = cx.d_matrix(1);
  const int m = cx.algebra().dim();
  RMat G1inv = RMat::Zero(cx.size(1), cx.size(1));
  const RMat& G1 = cx.gram_matrix(1);
  for (int i = 0; i < cx.cells(1); ++i) G1inv.block(i * m, i * m, m, m) = G1.block(i * m, i * m, m, m).inverse();
  if (cx.size(2) > 0) {
    const RMat M = D1 * G1inv * D1.transpose();
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (M + M.transpose()));
    const Vec rhs = D1 * cx.to_vec(alpha);
    const double cut = 1e-11 * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    Vec nu = Vec::Zero(rhs.size());
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()(i) > cut) {
        nu += (es.eigenvectors().col(i).dot(rhs) / es.eigenvalues()(i)) * es.eigenvectors().col(i);
      }
    }
    h.coexact = cx.from_vec(1, G1inv * (D1.transpose() * nu));
  } else {
    h.coexact = cx.zero(1);
  }
  h.harmonic = sub(sub(alpha, h.exact), h.coexact);

  const double na = std::max(cx.norm(alpha), 1e-300);
  h.reconstruction_error = cx.norm(sub(alpha, add(add(h.exact, h.coexact), h.harmonic))) / na;
  const TwistedCochain* parts[3] = {&h.exact, &h.coexact, &h.harmonic};
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double den = std::max(cx.norm(*parts[i]) * cx.norm(*parts[j]), na * na * 1e-30);
      h.max_cross_inner = std::max(h.max_cross_inner, std::abs(cx.inner(*parts[i], *parts[j])) / den);
    }
  }
  const Vec lap = cx.hodge_laplacian1() * cx.to_vec(h.harmonic);
  h.harmonic_laplacian_residual = std::sqrt(std::max(0.0, lap.dot(cx.gram_matrix(1) * lap))) / na;
  return h;
}

double kernel_split_residual(const TwistedComplex& cx) {
  double worst = 0.0;
  for (const TwistedCochain& xi : cx.kernel_basis()) {
    const double nx = std::max(cx.norm(xi), 1e-300);
    worst = std::max(worst, cx.norm(cx.jacobi(pointwise_k(cx, xi))) / nx);
    worst = std::max(worst, cx.norm(cx.jacobi(pointwise_p(cx, xi))) / nx);
  }
  return worst;
}

double maurer_cartan_residual(const CoverMesh& mesh, const Representation& rho, const EquivariantMap& f) {
  const std::vector<GroupElem> hol = edge_holonomies(mesh, rho);
  const auto sides = face_side_transports(mesh, hol);
  const std::vector<AlgElem> beta = edge_betas(mesh, rho, f);
  double acc = 0.0;
  for (int fi = 0; fi < mesh.num_faces(); ++fi) {
    AlgElem dbeta = rho.algebra.zero();
    AlgElem wedge = rho.algebra.zero();
    for (const SideTransport& s : sides[fi]) {
      const AlgElem t = s.sign * ad_action(s.T, beta[s.edge]);
      wedge += bracket(dbeta, t);
      dbeta += t;
    }
    const Mat& P = f.values[mesh.face_base_vertex(fi)];
    const double r = norm_at(P, dbeta - wedge);
    acc += r * r / mesh.faces[fi].area;
  }
  return std::sqrt(acc);
}

std::string spectrum_csv(const TwistedComplex& cx) {
  std::ostringstream os;
  os.precision(17);
  os << "index,eigenvalue,in_kernel\n";
  for (int i = 0; i < cx.jacobi_spectrum().size(); ++i) {
    const double l = cx.jacobi_spectrum()(i);
    os << i << ',' << l << ',' << (l <= cx.kernel_cutoff() ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace equivar
