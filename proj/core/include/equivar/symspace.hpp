#pragma once

#include "equivar/liealg.hpp"

namespace equivar {

// Points of G/K in the positive-definite model. A point of the C* target is
// the 1x1 matrix |s|^2.
using SymPoint = Mat;

void check_point(const SymPoint& P, bool special, double tol = 1e-9);

// Hermitian positive-definite matrix functions.
Mat hpd_sqrt(const Mat& P);
Mat hpd_inv_sqrt(const Mat& P);
Mat hpd_log(const Mat& P);
Mat hpd_pow(const Mat& P, double t);
Mat hermitian_exp(const Mat& H);

SymPoint act(const GroupElem& g, const SymPoint& P);
double dist(const SymPoint& P, const SymPoint& Q);
SymPoint geodesic(const SymPoint& P, const SymPoint& Q, double t);
SymPoint exp_point(const SymPoint& P, const AlgElem& X);

// Discrete Maurer-Cartan value 1/2 log(Q P^-1); selfadjoint at P.
AlgElem mc_edge(const SymPoint& P, const SymPoint& Q);

// ||mc_edge(P,Q)||_P = kMcScale * dist(P,Q).
inline constexpr double kMcScale = 0.5;

// Rescale so that det P = 1 (no-op for n = 1).
SymPoint normalize_det(const SymPoint& P);

struct TranslationResult {
  double length = 0.0;
  bool attained = false;
  double grad_norm = 0.0;
  double drift = 0.0;  // distance of the final basepoint from I
  int iterations = 0;
};

struct TranslationParams {
  double grad_tol = 1e-8;
  double radius = 50.0;
  int max_iter = 4000;
  int restarts = 3;
  unsigned long long seed = 7;
};

TranslationResult translation_length(const GroupElem& g, const TranslationParams& params = {});

}  // namespace equivar
