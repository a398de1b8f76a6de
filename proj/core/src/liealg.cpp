#include "equivar/liealg.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace equivar {

namespace {

const cplx kI(0.0, 1.0);

void require_square_same(const Mat& A, const Mat& B, const char* what) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::SL_R: return "SL_R";
    case GroupKind::SL_C: return "SL_C";
    case GroupKind::GL1_C: return "GL1_C";
  }
  return "?";
}

GroupKind group_kind_from_string(const std::string& s) {
  if (s == "SL_R") return GroupKind::SL_R;
  if (s == "SL_C") return GroupKind::SL_C;
  if (s == "GL1_C") return GroupKind::GL1_C;
  throw std::invalid_argument("unknown group kind: " + s);
}

Algebra::Algebra(GroupKind kind, int n) : kind_(kind), n_(n) {
  if (kind == GroupKind::GL1_C) {
    if (n != 1) throw std::invalid_argument("gl(1,C) requires n = 1");
    basis_.push_back(Mat::Constant(1, 1, cplx(1.0, 0.0)));
    basis_.push_back(Mat::Constant(1, 1, kI));
    return;
  }
  if (n < 2) throw std::invalid_argument("sl(n) requires n >= 2");
  const bool cx = kind == GroupKind::SL_C;
  auto push = [&](const Mat& B) {
    basis_.push_back(B);
    if (cx) basis_.push_back(kI * B);
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      Mat E = Mat::Zero(n, n);
      E(i, j) = 1.0;
      push(E);
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    Mat H = Mat::Zero(n, n);
    H(i, i) = 1.0;
    H(n - 1, n - 1) = -1.0;
    push(H);
  }
}

std::string Algebra::name() const {
  switch (kind_) {
    case GroupKind::SL_R: return "sl(" + std::to_string(n_) + ",R)";
    case GroupKind::SL_C: return "sl(" + std::to_string(n_) + ",C)";
    case GroupKind::GL1_C: return "gl(1,C)";
  }
  return "?";
}

Vec Algebra::coords(const AlgElem& X) const {
  if (X.rows() != n_ || X.cols() != n_) {
    throw std::invalid_argument("coords: dimension mismatch");
  }
  Vec v(dim());
  if (kind_ == GroupKind::GL1_C) {
    v << X(0, 0).real(), X(0, 0).imag();
    return v;
  }
  const bool cx = kind_ == GroupKind::SL_C;
  int k = 0;
  auto put = [&](cplx z) {
    v(k++) = z.real();
    if (cx) v(k++) = z.imag();
  };
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i != j) put(X(i, j));
    }
  }
  for (int i = 0; i + 1 < n_; ++i) put(X(i, i));
  return v;
}

AlgElem Algebra::from_coords(const Vec& v) const {
  if (v.size() != dim()) throw std::invalid_argument("from_coords: size mismatch");
  Mat X = Mat::Zero(n_, n_);
  for (int a = 0; a < dim(); ++a) X += v(a) * basis_[a];
  return X;
}

void Algebra::check_element(const AlgElem& X, double tol) const {
  if (X.rows() != n_ || X.cols() != n_) {
    throw std::invalid_argument(name() + ": element has wrong size");
  }
  if (!X.allFinite()) throw std::invalid_argument(name() + ": non-finite entries");
  if (is_special() && std::abs(X.trace()) > tol * std::max(1.0, X.norm())) {
    throw std::invalid_argument(name() + ": trace is not zero");
  }
  if (kind_ == GroupKind::SL_R && X.imag().norm() > tol * std::max(1.0, X.norm())) {
    throw std::invalid_argument(name() + ": element is not real");
  }
}

void Algebra::check_group(const GroupElem& g, double tol) const {
  if (g.rows() != n_ || g.cols() != n_) {
    throw std::invalid_argument(name() + ": group element has wrong size");
  }
  if (!g.allFinite()) throw std::invalid_argument(name() + ": non-finite group element");
  const cplx det = g.determinant();
  if (is_special()) {
    if (std::abs(det - cplx(1.0, 0.0)) > tol) {
      throw std::invalid_argument(name() + ": determinant is not 1");
    }
  } else if (std::abs(det) < 1e-300) {
    throw std::invalid_argument(name() + ": singular group element");
  }
  if (kind_ == GroupKind::SL_R && g.imag().norm() > tol * std::max(1.0, g.norm())) {
    throw std::invalid_argument(name() + ": group element is not real");
  }
}

RMat Algebra::ad_matrix(const GroupElem& g) const {
  const Mat gi = g.inverse();
  RMat A(dim(), dim());
  for (int a = 0; a < dim(); ++a) A.col(a) = coords(g * basis_[a] * gi);
  return A;
}

RMat Algebra::ad_lie_matrix(const AlgElem& X) const {
  RMat A(dim(), dim());
  for (int a = 0; a < dim(); ++a) A.col(a) = coords(X * basis_[a] - basis_[a] * X);
  return A;
}

RMat Algebra::gram(const Mat& P) const {
  const Mat Pi = P.inverse();
  const int d = dim();
  std::vector<Mat> adj(d);
  for (int b = 0; b < d; ++b) adj[b] = P * basis_[b].adjoint() * Pi;
  RMat G(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b <= a; ++b) {
      const double v = (basis_[a] * adj[b]).trace().real();
      G(a, b) = v;
      G(b, a) = v;
    }
  }
  return G;
}

AlgElem bracket(const AlgElem& X, const AlgElem& Y) {
  require_square_same(X, Y, "bracket");
  return X * Y - Y * X;
}

AlgElem ad_action(const GroupElem& g, const AlgElem& X) {
  require_square_same(g, X, "ad_action");
  Eigen::PartialPivLU<Mat> lu(g);
  if (std::abs(lu.determinant()) < 1e-300) {
    throw std::invalid_argument("ad_action: singular group element");
  }
  return g * X * lu.inverse();
}

GroupElem expm(const AlgElem& X) {
  if (X.rows() == 1) return Mat::Constant(1, 1, std::exp(X(0, 0)));
  return X.exp();
}

Jet2Elem jet2_identity(int n) {
  return {Mat::Identity(n, n), Mat::Zero(n, n), Mat::Zero(n, n)};
}

Jet2Elem jet2_mul(const Jet2Elem& a, const Jet2Elem& b) {
  require_square_same(a.g, b.g, "jet2_mul");
  require_square_same(a.xi, b.xi, "jet2_mul");
  const AlgElem ad_eta = ad_action(a.g, b.xi);
  return {a.g * b.g, a.xi + ad_eta, a.mu + ad_action(a.g, b.mu) + bracket(a.xi, ad_eta)};
}

Jet2Elem jet2_inverse(const Jet2Elem& a) {
  // From the product law: Ad_g eta = -xi, and the bracket term then vanishes.
  const Mat gi = a.g.inverse();
  return {gi, -ad_action(gi, a.xi), -ad_action(gi, a.mu)};
}

double inner_at(const Mat& P, const AlgElem& X, const AlgElem& Y) {
  return (X * adjoint_at(P, Y)).trace().real();
}

double norm_at(const Mat& P, const AlgElem& X) {
  return std::sqrt(std::max(0.0, inner_at(P, X, X)));
}

AlgElem adjoint_at(const Mat& P, const AlgElem& X) {
  require_square_same(P, X, "adjoint_at");
  Eigen::LLT<Mat> llt(0.5 * (P + P.adjoint()));
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("adjoint_at: point is not positive definite");
  }
  // P X^dagger P^-1 = (P^-1 X P)^dagger.
  return llt.solve(X * P).adjoint();
}

CartanParts cartan_project(const Mat& P, const AlgElem& X) {
  const AlgElem Xs = adjoint_at(P, X);
  return {0.5 * (X - Xs), 0.5 * (X + Xs)};
}

}  // namespace equivar
