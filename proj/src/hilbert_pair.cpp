#include "mpsphere/hilbert_pair.hpp"

#include <cmath>
#include <sstream>

#include "mpsphere/errors.hpp"
#include "mpsphere/log.hpp"

namespace mps {

namespace {

void requireSymmetric(const Mat& m, const char* name) {
  double scale = m.cwiseAbs().maxCoeff();
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12 * std::max(scale, 1e-300))) {
    std::ostringstream os;
    os << name << " is not symmetric (max asymmetry " << asym << ")";
    throw Error(ErrorKind::Config, os.str());
  }
}

bool isSparse(const Mat& m) {
  if (m.rows() < 32) return false;
  Eigen::Index nnz = (m.array() != 0.0).count();
  return nnz * 10 <= m.size();
}

}  // namespace

void HilbertPair::factorize() {
  sparse_ = isSparse(gramE_) && isSparse(gramH_);
  if (sparse_) {
    spE_ = gramE_.sparseView();
    spH_ = gramH_.sparseView();
    spFactorE_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(spE_);
    if (spFactorE_->info() != Eigen::Success || spFactorE_->vectorD().minCoeff() <= 0.0)
      throw Error(ErrorKind::Config, "gramE is not positive definite");
  } else {
    spFactorE_.reset();
    factorE_.compute(gramE_);
    if (factorE_.info() != Eigen::Success) throw Error(ErrorKind::Config, "gramE is not positive definite");
  }
}

HilbertPair::HilbertPair(Mat gramE, Mat gramH) : gramE_(std::move(gramE)), gramH_(std::move(gramH)) {
  if (gramE_.rows() == 0 || gramE_.rows() != gramE_.cols() || gramH_.rows() != gramH_.cols() ||
      gramE_.rows() != gramH_.rows())
    throw Error(ErrorKind::DimensionMismatch, "Gram matrices must be square with equal size");
  requireSymmetric(gramE_, "gramE");
  requireSymmetric(gramH_, "gramH");
  gramE_ = 0.5 * (gramE_ + gramE_.transpose()).eval();
  gramH_ = 0.5 * (gramH_ + gramH_.transpose()).eval();

  Eigen::LLT<Mat> hchk(gramH_);
  if (hchk.info() != Eigen::Success) throw Error(ErrorKind::Config, "gramH is not positive definite");
  factorize();

  // Cheap sufficient test for |v| <= ||v||: (1 + 1e-10) gramE - gramH is PSD.
  Eigen::LDLT<Mat> gap((1.0 + 1e-10) * gramE_ - gramH_);
  bool ok = gap.info() == Eigen::Success && gap.vectorD().minCoeff() >= 0.0;
  if (!ok) {
    double lam = injectionNormSquared();
    if (lam > 1.0 + 1e-10) {
      rescale_ = lam;
      gramE_ *= lam;
      factorize();
      std::ostringstream os;
      os << "injection norm squared " << lam << " exceeds 1; gramE rescaled";
      logWarning(os.str());
    }
  }
}

void HilbertPair::checkDim(const Vec& a) const {
  if (a.size() != gramE_.rows()) {
    std::ostringstream os;
    os << "vector of length " << a.size() << " for pair of dimension " << gramE_.rows();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

Vec HilbertPair::applyE(const Vec& x) const {
  checkDim(x);
  if (sparse_) return spE_ * x;
  return gramE_ * x;
}

Vec HilbertPair::applyH(const Vec& x) const {
  checkDim(x);
  if (sparse_) return spH_ * x;
  return gramH_ * x;
}

Mat HilbertPair::applyE(const Mat& x) const {
  if (sparse_) return spE_ * x;
  return gramE_ * x;
}

double HilbertPair::innerE(const Vec& a, const Vec& b) const {
  checkDim(a);
  return a.dot(applyE(b));
}

double HilbertPair::innerH(const Vec& a, const Vec& b) const {
  checkDim(a);
  return a.dot(applyH(b));
}

double HilbertPair::normE(const Vec& a) const { return std::sqrt(std::max(0.0, innerE(a, a))); }
double HilbertPair::normH(const Vec& a) const { return std::sqrt(std::max(0.0, innerH(a, a))); }

Vec HilbertPair::solveE(const Vec& r) const {
  checkDim(r);
  if (sparse_) return spFactorE_->solve(r);
  return factorE_.solve(r);
}

Mat HilbertPair::solveE(const Mat& r) const {
  if (sparse_) return spFactorE_->solve(r);
  return factorE_.solve(r);
}

double HilbertPair::dualNorm(const Vec& r) const {
  Vec x = solveE(r);
  return std::sqrt(std::max(0.0, r.dot(x)));
}

Vec HilbertPair::applyG(const Vec& u) const {
  return solveE(applyH(u));
}

Vec HilbertPair::projectTangentH(const SpherePoint& p, const Vec& x) const {
  return x - (innerH(p.u, x) / p.mu) * p.u;
}

Vec HilbertPair::projectTangentE(const SpherePoint& p, const Vec& x) const {
  Vec Gu = applyG(p.u);
  return projectTangentE(Gu, x, innerE(Gu, Gu));
}

Vec HilbertPair::projectTangentE(const Vec& Gu, const Vec& x, double GuNorm2) const {
  return x - (innerE(x, Gu) / GuNorm2) * Gu;
}

Vec HilbertPair::renormalize(const Vec& u, double mu) const {
  double n2 = innerH(u, u);
  if (!(n2 > 0.0)) throw Error(ErrorKind::Config, "cannot renormalize the zero vector");
  return u * std::sqrt(mu / n2);
}

bool HilbertPair::onSphere(const Vec& u, double mu, double tol) const {
  return std::abs(innerH(u, u) - mu) <= tol * mu;
}

bool HilbertPair::isTangent(const SpherePoint& p, const Vec& v, double tol) const {
  return std::abs(innerH(p.u, v)) <= tol * std::sqrt(p.mu) * std::max(normH(v), 1e-300);
}

double HilbertPair::injectionNormSquared() const {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(gramH_, gramE_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolverFailure, "pencil (gramH, gramE) eigensolve failed");
  return es.eigenvalues().maxCoeff();
}

}  // namespace mps
