#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>

namespace mps {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

struct SpherePoint {
  Vec u;
  double mu = 1.0;
};

struct TangentVector {
  Vec v;
};

// Two Gram forms on R^d: gramE realizes <.,.> and gramH realizes (.,.).
// Immutable after construction.
class HilbertPair {
 public:
  // Validates symmetry and definiteness.  If the injection E -> H has norm
  // above one, gramE is multiplied by the largest generalized eigenvalue of
  // (gramH, gramE) and a warning is logged.
  HilbertPair(Mat gramE, Mat gramH);

  int dim() const { return static_cast<int>(gramE_.rows()); }
  const Mat& gramE() const { return gramE_; }
  const Mat& gramH() const { return gramH_; }
  double rescaleFactor() const { return rescale_; }

  // gramE x and gramH x; banded Gram matrices use a sparse representation.
  Vec applyE(const Vec& x) const;
  Vec applyH(const Vec& x) const;
  Mat applyE(const Mat& x) const;
  bool sparse() const { return sparse_; }

  double innerE(const Vec& a, const Vec& b) const;
  double innerH(const Vec& a, const Vec& b) const;
  double normE(const Vec& a) const;
  double normH(const Vec& a) const;

  // Solves gramE x = r.  For a linear form r this is its E-Riesz representative.
  Vec solveE(const Vec& r) const;
  Mat solveE(const Mat& r) const;
  // Norm of the linear form r in E', sqrt(r^T gramE^{-1} r).
  double dualNorm(const Vec& r) const;

  // Gu with <Gu, h> = (u, h) for every h.
  Vec applyG(const Vec& u) const;

  // x - ((u,x)/mu) u
  Vec projectTangentH(const SpherePoint& p, const Vec& x) const;
  // x - (<x,Gu>/||Gu||^2) Gu
  Vec projectTangentE(const SpherePoint& p, const Vec& x) const;
  // Same, with Gu supplied by the caller.
  Vec projectTangentE(const Vec& Gu, const Vec& x, double GuNorm2) const;

  // Radial rescaling onto S_mu.
  Vec renormalize(const Vec& u, double mu) const;
  bool onSphere(const Vec& u, double mu, double tol = 1e-9) const;
  bool isTangent(const SpherePoint& p, const Vec& v, double tol = 1e-9) const;

  // Largest generalized eigenvalue of (gramH, gramE), i.e. the squared
  // injection norm.  Dense and O(d^3); meant for diagnostics.
  double injectionNormSquared() const;

 private:
  void checkDim(const Vec& a) const;

  void factorize();

  Mat gramE_;
  Mat gramH_;
  Eigen::LLT<Mat> factorE_;
  bool sparse_ = false;
  SpMat spE_;
  SpMat spH_;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> spFactorE_;
  double rescale_ = 1.0;
};

}  // namespace mps
