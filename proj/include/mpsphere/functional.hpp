#pragma once

#include <vector>

#include "mpsphere/hilbert_pair.hpp"

namespace mps {

// A C^2 functional on E with the analytic data consumed by the descent lemmas.
// Implementations must be re-entrant: the drivers evaluate nodes concurrently.
class ConstrainedFunctional {
 public:
  virtual ~ConstrainedFunctional() = default;

  virtual int dim() const = 0;
  virtual double value(const Vec& u) const = 0;
  // Coordinates of the linear form phi'(u).
  virtual Vec gradDual(const Vec& u) const = 0;
  // Coordinates of the linear form phi''(u)[w, .].
  virtual Vec hessAction(const Vec& u, const Vec& w) const = 0;
  // Dense matrix of phi''(u); the default assembles it column by column.
  virtual Mat hessian(const Vec& u) const;

  // Holder constant M(R) on B(0,R), for both phi' and phi''.
  virtual double holderM(double R) const = 0;
  // K(R) >= 1 bounding ||phi'|| and ||D^2 phi|| on B(0,R) intersected with S_mu.
  virtual double boundK(double R, double mu) const = 0;
  virtual double alpha() const { return 1.0; }
  // phi(|u|) = phi(u) for the nodal modulus.
  virtual bool modulusInvariant() const { return false; }
};

// phi(u) = 1/2 u^T Q u + l . u
class QuadraticFunctional : public ConstrainedFunctional {
 public:
  QuadraticFunctional(const HilbertPair& pair, Mat Q, Vec linear = Vec());

  int dim() const override { return static_cast<int>(Q_.rows()); }
  double value(const Vec& u) const override;
  Vec gradDual(const Vec& u) const override;
  Vec hessAction(const Vec& u, const Vec& w) const override;
  Mat hessian(const Vec& u) const override { (void)u; return Q_; }
  double holderM(double R) const override;
  double boundK(double R, double mu) const override;

  const Mat& Q() const { return Q_; }
  // Operator norm of Q with respect to E.
  double normQ() const { return normQ_; }

 private:
  Vec applyQ(const Vec& x) const;

  Mat Q_;
  SpMat spQ_;
  bool sparseQ_ = false;
  Vec l_;
  double normQ_;
  double normL_;
};

struct MorseReport {
  double theta = 0.0;
  int count = 0;
  bool free = false;
  std::vector<double> eigenvalues;
  // E-orthonormal columns spanning the certified negative directions.
  Mat basis;
};

// D^2 phi(u) = phi''(u) - (phi'(u).u / |u|^2) (.,.)
double d2phi(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p, const Vec& a,
             const Vec& b);
Mat d2phiMatrix(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p);

// E-Riesz representative of phi' restricted to T_u S_mu.
Vec sphereGradient(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p);
double constrainedDualNorm(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p);
// ||phi'(u) - (1/mu)(phi'(u).u)(u,.)|| in E'.
double freeGradientResidual(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p);

double lagrangeEstimate(const ConstrainedFunctional& f, const SpherePoint& p);
// ||phi'(u) - lambda <Gu,.>|| in E' with lambda from lagrangeEstimate.
double eulerLagrangeResidual(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p);

// E-orthonormal basis of T_u S_mu (d x (d-1)).
Mat tangentBasis(const HilbertPair& pair, const SpherePoint& p);

MorseReport approxMorseIndex(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p,
                             double theta, bool free = false);
MorseReport approxMorseIndexFromForm(const Mat& D, const HilbertPair& pair, const SpherePoint& p, double theta,
                                     bool free = false);

// delta_1 for a frame W (columns, tangent at u) with D^2 phi(u) < -beta on W.
double stabilityRadius(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p,
                       const Mat& W, double beta, double R);

// Largest value of D^2 phi(u)[w,w] / ||w||^2 over span W.
double maxRayleighOnSpan(const Mat& D, const HilbertPair& pair, const Mat& W);

}  // namespace mps
