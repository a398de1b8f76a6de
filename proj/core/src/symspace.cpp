#include "equivar/symspace.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace equivar {

namespace {

constexpr double kEigFloor = 1e-14;

Mat herm(const Mat& A) { return 0.5 * (A + A.adjoint()); }

template <class F>
Mat spectral_apply(const Mat& P, F&& fn) {
  Eigen::SelfAdjointEigenSolver<Mat> es(herm(P));
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen-decomposition failed");
  const Eigen::VectorXd lam = es.eigenvalues();
  Eigen::VectorXcd mapped(lam.size());
  for (int i = 0; i < lam.size(); ++i) mapped(i) = fn(lam(i));
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().adjoint();
}

double positive_or_throw(double lam) {
  if (!(lam > 0.0)) throw std::invalid_argument("matrix is not positive definite");
  return std::max(lam, kEigFloor);
}

}  // namespace

void check_point(const SymPoint& P, bool special, double tol) {
  if (P.rows() != P.cols() || P.rows() == 0) throw std::invalid_argument("point: not square");
  if (!P.allFinite()) throw std::invalid_argument("point: non-finite entries");
  if ((P - P.adjoint()).norm() > 1e-9 * std::max(1.0, P.norm())) {
    throw std::invalid_argument("point: not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(herm(P), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("point: not positive definite");
  }
  if (special && P.rows() > 1 && std::abs(P.determinant().real() - 1.0) > tol) {
    throw std::invalid_argument("point: determinant is not 1");
  }
}

Mat hpd_sqrt(const Mat& P) {
  return spectral_apply(P, [](double l) { return cplx(std::sqrt(positive_or_throw(l)), 0.0); });
}

Mat hpd_inv_sqrt(const Mat& P) {
  return spectral_apply(P, [](double l) { return cplx(1.0 / std::sqrt(positive_or_throw(l)), 0.0); });
}

Mat hpd_log(const Mat& P) {
  return spectral_apply(P, [](double l) { return cplx(std::log(positive_or_throw(l)), 0.0); });
}

Mat hpd_pow(const Mat& P, double t) {
  return spectral_apply(P, [t](double l) { return cplx(std::pow(positive_or_throw(l), t), 0.0); });
}

Mat hermitian_exp(const Mat& H) {
  return spectral_apply(H, [](double l) { return cplx(std::exp(l), 0.0); });
}

SymPoint act(const GroupElem& g, const SymPoint& P) {
  if (g.rows() != P.rows() || g.cols() != P.cols()) {
    throw std::invalid_argument("act: dimension mismatch");
  }
  return herm(g * P * g.adjoint());
}

double dist(const SymPoint& P, const SymPoint& Q) {
  if (P.rows() != Q.rows()) throw std::invalid_argument("dist: dimension mismatch");
  const Mat S = hpd_inv_sqrt(P);
  Eigen::SelfAdjointEigenSolver<Mat> es(herm(S * Q * S), Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = std::log(positive_or_throw(es.eigenvalues()(i)));
    acc += l * l;
  }
  return std::sqrt(acc);
}

SymPoint geodesic(const SymPoint& P, const SymPoint& Q, double t) {
  const Mat R = hpd_sqrt(P);
  const Mat S = hpd_inv_sqrt(P);
  return herm(R * hpd_pow(S * Q * S, t) * R);
}

SymPoint exp_point(const SymPoint& P, const AlgElem& X) {
  if (X.rows() != P.rows()) throw std::invalid_argument("exp_point: dimension mismatch");
  // Only the selfadjoint part moves the point; using it keeps the exponential
  // Hermitian in the whitened frame, where it is computed exactly.
  const CartanParts parts = cartan_project(P, X);
  const Mat R = hpd_sqrt(P);
  const Mat S = hpd_inv_sqrt(P);
  const Mat Y = herm(S * parts.p * R);
  const Mat E = hermitian_exp(Y);
  return herm(R * E * E * R);
}

AlgElem mc_edge(const SymPoint& P, const SymPoint& Q) {
  if (P.rows() != Q.rows()) throw std::invalid_argument("mc_edge: dimension mismatch");
  const Mat R = hpd_sqrt(P);
  const Mat S = hpd_inv_sqrt(P);
  // 1/2 log(Q P^-1) = P^{1/2} (1/2 log(P^{-1/2} Q P^{-1/2})) P^{-1/2}.
  return R * (0.5 * hpd_log(S * Q * S)) * S;
}

SymPoint normalize_det(const SymPoint& P) {
  const int n = static_cast<int>(P.rows());
  if (n == 1) return P;
  const double det = P.determinant().real();
  if (!(det > 0.0)) throw std::invalid_argument("normalize_det: non-positive determinant");
  return P * std::pow(det, -1.0 / n);
}

namespace {

// Objective 1/2 dist(P, gP)^2 and its Riemannian gradient at P.
struct DisplacementEval {
  double value;
  AlgElem grad;
};

DisplacementEval displacement(const GroupElem& g, const Mat& gi, const SymPoint& P) {
  const SymPoint Q = act(g, P);
  const AlgElem beta = mc_edge(P, Q);
  const double d = dist(P, Q);
  // Moving P by X moves Q by Ad_g X; the differential is Re tr(G X).
  const AlgElem G = 4.0 * (gi * beta * g - beta);
  return {0.5 * d * d, cartan_project(P, G).p};
}

TranslationResult minimize_from(const GroupElem& g, SymPoint P, const TranslationParams& params) {
  const Mat gi = g.inverse();
  const bool special = g.rows() > 1;
  const SymPoint I = Mat::Identity(g.rows(), g.cols());
  DisplacementEval cur = displacement(g, gi, P);
  double step = 0.25;
  int it = 0;
  AlgElem prev_grad;
  SymPoint prev_P;
  for (; it < params.max_iter; ++it) {
    const double gn = norm_at(P, cur.grad);
    if (gn < 1e-3 * params.grad_tol) break;
    if (it > 0) {
      // Barzilai-Borwein step from the last displacement, transported naively.
      const AlgElem s = mc_edge(prev_P, P);
      const AlgElem y = cur.grad - prev_grad;
      const double sy = inner_at(P, s, y);
      if (sy > 0.0) step = std::clamp(inner_at(P, s, s) / sy, 1e-8, 1e8);
    }
    double t = step;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      SymPoint Pn = exp_point(P, -t * cur.grad);
      if (special) Pn = normalize_det(Pn);
      const DisplacementEval nxt = displacement(g, gi, Pn);
      if (nxt.value <= cur.value - 1e-4 * t * gn * gn) {
        prev_P = P;
        prev_grad = cur.grad;
        P = Pn;
        cur = nxt;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    if (dist(I, P) > 4.0 * params.radius) break;
  }
  TranslationResult r;
  r.length = std::sqrt(2.0 * cur.value);
  r.grad_norm = norm_at(P, cur.grad);
  r.drift = dist(I, P);
  r.iterations = it;
  // A genuine minimizer has a vanishing gradient. Along a horocyclic
  // minimizing sequence the ratio |grad| / value stays of order one even as
  // both tend to zero, so stationarity is also required relative to the value.
  const bool stationary = r.grad_norm < params.grad_tol &&
                          (cur.value < 1e-16 || r.grad_norm <= 1e-4 * cur.value);
  r.attained = stationary && r.drift < params.radius;
  return r;
}

}  // namespace

TranslationResult translation_length(const GroupElem& g, const TranslationParams& params) {
  if (g.rows() != g.cols()) throw std::invalid_argument("translation_length: not square");
  const int n = static_cast<int>(g.rows());
  TranslationResult best = minimize_from(g, Mat::Identity(n, n), params);
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int r = 0; r < params.restarts; ++r) {
    Mat H(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) H(i, j) = cplx(nd(rng), g.imag().norm() > 0 ? nd(rng) : 0.0);
    }
    H = herm(H);
    if (n > 1) H -= (H.trace() / double(n)) * Mat::Identity(n, n);
    const TranslationResult cand = minimize_from(g, hermitian_exp(H), params);
    if (cand.length < best.length - 1e-12 || (cand.attained && !best.attained &&
                                               cand.length <= best.length + 1e-9)) {
      best = cand;
    }
  }
  return best;
}

}  // namespace equivar
