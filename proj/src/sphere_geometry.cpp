#include "mpsphere/sphere_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mpsphere/errors.hpp"

namespace mps {

Geodesic::Geodesic(const HilbertPair& pair, Vec u, Vec v, double mu)
    : u_(std::move(u)), v_(std::move(v)), mu_(mu) {
  speed_ = pair.normH(v_);
  omega_ = speed_ / std::sqrt(mu_);
}

Vec Geodesic::point(double t) const {
  if (omega_ == 0.0) return u_;
  double wt = omega_ * t;
  return std::cos(wt) * u_ + (std::sin(wt) / omega_) * v_;
}

Vec Geodesic::velocity(double t) const {
  if (omega_ == 0.0) return v_;
  double wt = omega_ * t;
  return (-omega_ * std::sin(wt)) * u_ + std::cos(wt) * v_;
}

Vec Geodesic::equationResidual(double t) const {
  double wt = omega_ * t;
  Vec acc = (-omega_ * omega_ * std::cos(wt)) * u_ - (omega_ * std::sin(wt)) * v_;
  return acc + (speed_ * speed_ / mu_) * point(t);
}

Vec expMap(const HilbertPair& pair, const SpherePoint& p, const Vec& v) {
  return Geodesic(pair, p.u, v, p.mu).point(1.0);
}

Vec logMap(const HilbertPair& pair, const SpherePoint& origin, const Vec& u) {
  double mu = origin.mu;
  double c = std::clamp(pair.innerH(u, origin.u) / mu, -1.0, 1.0);
  if (c < -1.0 + 1e-6) {
    std::ostringstream os;
    os << "logMap: near-antipodal pair, (u,u0)/mu = " << c;
    throw Error(ErrorKind::AntipodalPoint, os.str());
  }
  Vec t = u - c * origin.u;
  double s = pair.normH(t) / std::sqrt(mu);
  if (s == 0.0) return Vec::Zero(u.size());
  double theta = std::atan2(s, c);
  double factor;
  if (theta < 1e-4) {
    double th2 = theta * theta;
    factor = 1.0 + th2 / 6.0 + 7.0 * th2 * th2 / 360.0;
  } else {
    factor = theta / s;
  }
  return factor * t;
}

int transportSteps(double speedH, double mu) {
  double h = 1e-3 * std::sqrt(mu);
  return std::max(50, static_cast<int>(std::ceil(speedH / h)));
}

Mat transportAlongGeodesic(const HilbertPair& pair, const SpherePoint& base, const Vec& v, const Mat& W, int steps) {
  double mu = base.mu;
  double speed = pair.normH(v);
  if (speed == 0.0 || W.cols() == 0) return W;
  if (steps <= 0) steps = transportSteps(speed, mu);
  double omega = speed / std::sqrt(mu);

  // G sigma(t) = cos(wt) G u + sin(wt)/w G v, so Phi(t) = W + Gu a(t)^T + Gv b(t)^T
  // and only the 2 x k coefficient block is integrated.
  const Vec Gu = pair.applyG(base.u);
  const Vec Gv = pair.applyG(v);
  const double aa = pair.innerE(Gu, Gu);
  const double ab = pair.innerE(Gu, Gv);
  const double bb = pair.innerE(Gv, Gv);
  const Vec Hu = pair.applyH(base.u);
  const Vec Hv = pair.applyH(v);
  const Eigen::RowVectorXd huW = Hu.transpose() * W, hvW = Hv.transpose() * W;
  const double huGu = Hu.dot(Gu), huGv = Hu.dot(Gv), hvGu = Hv.dot(Gu), hvGv = Hv.dot(Gv);
  const int k = static_cast<int>(W.cols());

  auto rhs = [&](double t, const Mat& C) -> Mat {
    double c = std::cos(omega * t), s = std::sin(omega * t);
    double sw = s / omega;
    double gnorm2 = c * c * aa + 2.0 * c * sw * ab + sw * sw * bb;
    double hu = -omega * s, hv = c;
    Eigen::RowVectorXd coef = hu * huW + hv * hvW + (hu * huGu + hv * hvGu) * C.row(0) +
                              (hu * huGv + hv * hvGv) * C.row(1);
    Mat out(2, k);
    out.row(0) = -(c / gnorm2) * coef;
    out.row(1) = -(sw / gnorm2) * coef;
    return out;
  };

  Mat C = Mat::Zero(2, k);
  double h = 1.0 / steps;
  for (int j = 0; j < steps; ++j) {
    double t = j * h;
    Mat k1 = rhs(t, C);
    Mat k2 = rhs(t + 0.5 * h, C + 0.5 * h * k1);
    Mat k3 = rhs(t + 0.5 * h, C + 0.5 * h * k2);
    Mat k4 = rhs(t + h, C + h * k3);
    C += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return W + Gu * C.row(0) + Gv * C.row(1);
}

RadialTransport::RadialTransport(const HilbertPair& pair, const SpherePoint& origin, const Vec& target)
    : pair_(&pair), origin_(origin), target_(target) {
  v_ = logMap(pair, origin, target);
  steps_ = transportSteps(pair.normH(v_), origin.mu);
}

Vec RadialTransport::apply(const Vec& w0) const {
  Mat W(w0.size(), 1);
  W.col(0) = w0;
  return apply(W).col(0);
}

Mat RadialTransport::apply(const Mat& W0) const {
  return transportAlongGeodesic(*pair_, origin_, v_, W0, steps_);
}

Mat RadialTransport::applyInverse(const Mat& W) const {
  Geodesic g(*pair_, origin_.u, v_, origin_.mu);
  Vec back = -g.velocity(1.0);
  return transportAlongGeodesic(*pair_, SpherePoint{target_, origin_.mu}, back, W, steps_);
}

Mat transportFrame(const HilbertPair& pair, const SpherePoint& origin, const Mat& basis, const Vec& u) {
  return RadialTransport(pair, origin, u).apply(basis);
}

double holonomyDefect(const HilbertPair& pair, const SpherePoint& origin, const Vec& u, const Mat& basis,
                      double tau) {
  const int k = static_cast<int>(basis.cols());
  Mat Wu = transportFrame(pair, origin, basis, u);
  std::vector<Vec> dirs;
  for (int i = 0; i < k; ++i) dirs.push_back(Wu.col(i));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      dirs.push_back(Wu.col(i) + Wu.col(j));
      dirs.push_back(Wu.col(i) - Wu.col(j));
    }
  double worst = 0.0;
  for (Vec w : dirs) {
    double nw = pair.normE(w);
    if (nw == 0.0) continue;
    w /= nw;
    Geodesic g(pair, u, w, origin.mu);
    Vec u1 = g.point(tau);
    Vec w1 = g.velocity(tau);
    Mat F = transportFrame(pair, origin, basis, u1);
    Vec Pw1 = Vec::Zero(w1.size());
    for (int i = 0; i < k; ++i) Pw1 += pair.innerE(w1, F.col(i)) * F.col(i);
    worst = std::max(worst, pair.normE(Pw1 - w1));
  }
  return worst;
}

namespace {

// 1 - cos(x) without cancellation for small x.
double oneMinusCos(double x) {
  double s = std::sin(0.5 * x);
  return 2.0 * s * s;
}

}  // namespace

double GeometryConstants::C() const { return (R + (R - 1.0) / std::sqrt(mu)) / mu; }

double GeometryConstants::delta0() const { return std::min(1.0, std::sqrt(mu)); }

double GeometryConstants::holderC() const { return M * (1.0 + (R + std::pow(R, alpha)) / mu); }

double GeometryConstants::delta1(double beta) const {
  return std::min(1.0, std::pow(beta / (4.0 * holderC()), 1.0 / alpha));
}

double GeometryConstants::delta2(double beta) const {
  double x = beta / (8.0 * std::sqrt(mu) * K * C());
  if (x < M_PI) return std::min({std::sqrt(mu) * oneMinusCos(x), delta1(beta), delta0()});
  return std::min(delta1(beta), delta0());
}

double GeometryConstants::Chat() const {
  return 96.0 * std::sqrt(mu) * K * (3.0 + std::sqrt(n + 1.0)) * C();
}

double GeometryConstants::delta3(double beta) const {
  double y = beta / Chat();
  double a = beta * mu / (12.0 * K * R * (1.0 + std::sqrt(n + 1.0)));
  if (y < M_PI) return std::min({std::sqrt(mu) * oneMinusCos(y), a, delta2(beta)});
  return std::min(a, delta2(beta));
}

double GeometryConstants::tmax(double delta) const { return std::min(2.0 * mu / R, delta / 4.0); }

}  // namespace mps
