#pragma once

#include <utility>

#include "mpsphere/hilbert_pair.hpp"

namespace mps {

// F1 geodesic sigma(t) = cos(wt) u + sin(wt)/w v with w = |v|/sqrt(mu).
class Geodesic {
 public:
  Geodesic(const HilbertPair& pair, Vec u, Vec v, double mu);

  double omega() const { return omega_; }
  double mu() const { return mu_; }
  const Vec& base() const { return u_; }
  const Vec& velocity0() const { return v_; }

  Vec point(double t) const;
  Vec velocity(double t) const;
  std::pair<Vec, Vec> eval(double t) const { return {point(t), velocity(t)}; }
  // sigma'' + (|sigma'|^2/mu) sigma, which vanishes along an F1 geodesic.
  Vec equationResidual(double t) const;

 private:
  Vec u_;
  Vec v_;
  double mu_;
  double speed_;
  double omega_;
};

Vec expMap(const HilbertPair& pair, const SpherePoint& p, const Vec& v);

// Inverse of expMap at origin.  Throws AntipodalPoint when (u,u0)/mu < -1 + 1e-6.
Vec logMap(const HilbertPair& pair, const SpherePoint& origin, const Vec& u);

int transportSteps(double speedH, double mu);

// Transports the columns of W (tangent at base) along t -> exp_base(t v),
// t in [0,1], with the F2 transport equation and classical RK4.
Mat transportAlongGeodesic(const HilbertPair& pair, const SpherePoint& base, const Vec& v, const Mat& W,
                           int steps = 0);

// Radial transport T_u from origin u0 to u along the geodesic with velocity log_{u0}(u).
class RadialTransport {
 public:
  RadialTransport(const HilbertPair& pair, const SpherePoint& origin, const Vec& target);

  const Vec& logVector() const { return v_; }
  int steps() const { return steps_; }
  Vec apply(const Vec& w0) const;
  Mat apply(const Mat& W0) const;
  // Transport back from the target to the origin along the reversed curve.
  Mat applyInverse(const Mat& W) const;

 private:
  const HilbertPair* pair_;
  SpherePoint origin_;
  Vec target_;
  Vec v_;
  int steps_;
};

Mat transportFrame(const HilbertPair& pair, const SpherePoint& origin, const Mat& basis, const Vec& u);

// Max over sampled unit w in W(u) of ||P w1 - w1||, where u1 = sigma(tau,u,w),
// w1 = sigma'(tau,u,w) and P projects onto W(u1) = T_{u1} W.
double holonomyDefect(const HilbertPair& pair, const SpherePoint& origin, const Vec& u, const Mat& basis,
                      double tau);

// Radii and step bounds of the second-order descent construction.
struct GeometryConstants {
  double R = 2.0;
  double mu = 1.0;
  double K = 1.0;
  double M = 1.0;
  double alpha = 1.0;
  int n = 1;

  double C() const;
  double delta0() const;
  double holderC() const;  // M (1 + (R + R^alpha)/mu)
  double delta1(double beta) const;
  double delta2(double beta) const;
  double Chat() const;
  double delta3(double beta) const;
  double tmax(double delta) const;
};

}  // namespace mps
