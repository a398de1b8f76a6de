#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace equivar {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Algebra and group elements are plain complex matrices; the owning Algebra
// decides which constraints apply.
using AlgElem = Mat;
using GroupElem = Mat;

enum class GroupKind { SL_R, SL_C, GL1_C };

std::string to_string(GroupKind kind);
GroupKind group_kind_from_string(const std::string& s);

// Real coordinate model of sl(n,R), sl(n,C) or gl(1,C) = C.
class Algebra {
 public:
  Algebra(GroupKind kind, int n);

  static Algebra sl_real(int n) { return Algebra(GroupKind::SL_R, n); }
  static Algebra sl_complex(int n) { return Algebra(GroupKind::SL_C, n); }
  static Algebra gl1_complex() { return Algebra(GroupKind::GL1_C, 1); }

  GroupKind kind() const { return kind_; }
  int n() const { return n_; }
  // Real dimension.
  int dim() const { return static_cast<int>(basis_.size()); }
  bool is_complex() const { return kind_ != GroupKind::SL_R; }
  bool is_special() const { return kind_ != GroupKind::GL1_C; }
  std::string name() const;

  const std::vector<Mat>& basis() const { return basis_; }
  Vec coords(const AlgElem& X) const;
  AlgElem from_coords(const Vec& v) const;

  AlgElem zero() const { return Mat::Zero(n_, n_); }
  GroupElem identity() const { return Mat::Identity(n_, n_); }

  // Throw std::invalid_argument when the constraints fail.
  void check_element(const AlgElem& X, double tol = 1e-12) const;
  void check_group(const GroupElem& g, double tol = 1e-9) const;

  // Real matrix of Ad_g acting on coordinates.
  RMat ad_matrix(const GroupElem& g) const;
  // Real matrix of ad_X = [X, .] acting on coordinates.
  RMat ad_lie_matrix(const AlgElem& X) const;
  // Gram matrix of the fibre metric <X,Y>_P = Re tr(X P Y^dagger P^-1).
  RMat gram(const Mat& P) const;

  bool operator==(const Algebra& o) const { return kind_ == o.kind_ && n_ == o.n_; }
  bool operator!=(const Algebra& o) const { return !(*this == o); }

 private:
  GroupKind kind_;
  int n_;
  std::vector<Mat> basis_;
};

AlgElem bracket(const AlgElem& X, const AlgElem& Y);
AlgElem ad_action(const GroupElem& g, const AlgElem& X);
GroupElem expm(const AlgElem& X);

struct Jet2Elem {
  GroupElem g;
  AlgElem xi;
  AlgElem mu;
};

Jet2Elem jet2_identity(int n);
Jet2Elem jet2_mul(const Jet2Elem& a, const Jet2Elem& b);
Jet2Elem jet2_inverse(const Jet2Elem& a);

// Fibre metric at a symmetric-space point P.
double inner_at(const Mat& P, const AlgElem& X, const AlgElem& Y);
double norm_at(const Mat& P, const AlgElem& X);

AlgElem adjoint_at(const Mat& P, const AlgElem& X);

struct CartanParts {
  AlgElem k;  // anti-selfadjoint at P
  AlgElem p;  // selfadjoint at P
};
CartanParts cartan_project(const Mat& P, const AlgElem& X);

}  // namespace equivar
