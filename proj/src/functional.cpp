#include "mpsphere/functional.hpp"

#include <cmath>
#include <sstream>

#include "mpsphere/errors.hpp"
#include "mpsphere/sphere_geometry.hpp"

namespace mps {

Mat ConstrainedFunctional::hessian(const Vec& u) const {
  const int d = dim();
  Mat H(d, d);
  for (int j = 0; j < d; ++j) H.col(j) = hessAction(u, Vec::Unit(d, j));
  return 0.5 * (H + H.transpose());
}

QuadraticFunctional::QuadraticFunctional(const HilbertPair& pair, Mat Q, Vec linear)
    : Q_(std::move(Q)), l_(std::move(linear)) {
  if (Q_.rows() != pair.dim() || Q_.cols() != pair.dim())
    throw Error(ErrorKind::DimensionMismatch, "quadratic form size differs from pair dimension");
  Q_ = 0.5 * (Q_ + Q_.transpose()).eval();
  if (l_.size() == 0) l_ = Vec::Zero(pair.dim());
  if (pair.sparse()) {
    spQ_ = Q_.sparseView();
    sparseQ_ = spQ_.nonZeros() * 10 <= Q_.size();
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Q_, pair.gramE(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolverFailure, "quadratic form eigensolve failed");
  normQ_ = es.eigenvalues().cwiseAbs().maxCoeff();
  normL_ = pair.dualNorm(l_);
}

Vec QuadraticFunctional::applyQ(const Vec& x) const {
  if (sparseQ_) return spQ_ * x;
  return Q_ * x;
}

double QuadraticFunctional::value(const Vec& u) const { return 0.5 * u.dot(applyQ(u)) + l_.dot(u); }

Vec QuadraticFunctional::gradDual(const Vec& u) const { return applyQ(u) + l_; }

Vec QuadraticFunctional::hessAction(const Vec& u, const Vec& w) const {
  (void)u;
  return applyQ(w);
}

double QuadraticFunctional::holderM(double R) const {
  (void)R;
  return std::max(normQ_, 1e-12);
}

double QuadraticFunctional::boundK(double R, double mu) const {
  double grad = normQ_ * R + normL_;
  double hess = normQ_ + (normQ_ * R * R + normL_ * R) / mu;
  return std::max({1.0, grad, hess});
}

double d2phi(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p, const Vec& a,
             const Vec& b) {
  double lam = f.gradDual(p.u).dot(p.u) / pair.innerH(p.u, p.u);
  return a.dot(f.hessAction(p.u, b)) - lam * pair.innerH(a, b);
}

Mat d2phiMatrix(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p) {
  double lam = f.gradDual(p.u).dot(p.u) / pair.innerH(p.u, p.u);
  Mat D = f.hessian(p.u) - lam * pair.gramH();
  return 0.5 * (D + D.transpose());
}

Vec sphereGradient(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p) {
  Vec g = f.gradDual(p.u);
  Vec gradE = pair.solveE(g);
  Vec Gu = pair.applyG(p.u);
  double gu2 = pair.innerE(Gu, Gu);
  return gradE - (g.dot(Gu) / gu2) * Gu;
}

double constrainedDualNorm(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p) {
  return pair.normE(sphereGradient(f, pair, p));
}

double freeGradientResidual(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p) {
  Vec g = f.gradDual(p.u);
  Vec r = g - (g.dot(p.u) / p.mu) * (pair.applyH(p.u));
  return pair.dualNorm(r);
}

double lagrangeEstimate(const ConstrainedFunctional& f, const SpherePoint& p) {
  return f.gradDual(p.u).dot(p.u) / p.mu;
}

double eulerLagrangeResidual(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p) {
  double lam = lagrangeEstimate(f, p);
  // The form <Gu, .> has coordinates gramE G u = gramH u.
  Vec r = f.gradDual(p.u) - lam * (pair.applyH(p.u));
  return pair.dualNorm(r);
}

Mat tangentBasis(const HilbertPair& pair, const SpherePoint& p) {
  const int d = pair.dim();
  Vec Hu = pair.applyH(p.u);
  double uu = p.u.dot(Hu);
  Mat C = Mat::Identity(d, d) - p.u * (Hu.transpose() / uu);
  Vec norms(d);
  for (int j = 0; j < d; ++j) norms(j) = std::sqrt(std::max(0.0, C.col(j).dot(pair.applyE(Vec(C.col(j))))));
  Eigen::Index drop;
  norms.minCoeff(&drop);
  Mat Ck(d, d - 1);
  for (int j = 0, k = 0; j < d; ++j)
    if (j != drop) Ck.col(k++) = C.col(j);
  Mat gram = Ck.transpose() * pair.applyE(Ck);
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::EigensolverFailure, "tangent Gram matrix not positive definite");
  // Q = Ck L^{-T}
  Mat Qt = llt.matrixL().solve(Ck.transpose());
  return Qt.transpose();
}

MorseReport approxMorseIndexFromForm(const Mat& D, const HilbertPair& pair, const SpherePoint& p, double theta,
                                     bool free) {
  if (theta < 0.0) throw Error(ErrorKind::Config, "Morse threshold must be nonnegative");
  MorseReport rep;
  rep.theta = theta;
  rep.free = free;
  Mat vecs;
  Vec vals;
  if (free) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(D, pair.gramE());
    if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolverFailure, "free Morse eigensolve failed");
    vals = es.eigenvalues();
    vecs = es.eigenvectors();
  } else {
    Mat Q = tangentBasis(pair, p);
    Mat A = Q.transpose() * D * Q;
    A = 0.5 * (A + A.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolverFailure, "tangent Morse eigensolve failed");
    vals = es.eigenvalues();
    vecs = Q * es.eigenvectors();
  }
  rep.eigenvalues.assign(vals.data(), vals.data() + vals.size());
  std::vector<int> neg;
  for (int i = 0; i < vals.size(); ++i)
    if (vals(i) < -(theta + 1e-10)) neg.push_back(i);
  rep.count = static_cast<int>(neg.size());
  rep.basis.resize(D.rows(), rep.count);
  for (int k = 0; k < rep.count; ++k) {
    Vec w = vecs.col(neg[k]);
    rep.basis.col(k) = w / pair.normE(w);
  }
  return rep;
}

MorseReport approxMorseIndex(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p,
                             double theta, bool free) {
  return approxMorseIndexFromForm(d2phiMatrix(f, pair, p), pair, p, theta, free);
}

double maxRayleighOnSpan(const Mat& D, const HilbertPair& pair, const Mat& W) {
  Mat A = W.transpose() * D * W;
  Mat B = W.transpose() * pair.applyE(W);
  A = 0.5 * (A + A.transpose()).eval();
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(A, B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolverFailure, "frame Rayleigh eigensolve failed");
  return es.eigenvalues().maxCoeff();
}

double stabilityRadius(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p,
                       const Mat& W, double beta, double R) {
  Mat D = d2phiMatrix(f, pair, p);
  double top = maxRayleighOnSpan(D, pair, W);
  if (!(top < -beta)) {
    std::ostringstream os;
    os << "frame is not uniformly negative: max Rayleigh quotient " << top << " >= -beta = " << -beta;
    throw Error(ErrorKind::HypothesisViolated, os.str());
  }
  GeometryConstants gc;
  gc.R = R;
  gc.mu = p.mu;
  gc.M = f.holderM(R);
  gc.K = f.boundK(R, p.mu);
  gc.alpha = f.alpha();
  gc.n = static_cast<int>(W.cols()) - 1;
  return gc.delta1(beta);
}

}  // namespace mps
