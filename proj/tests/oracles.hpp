#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "mpsphere/family.hpp"
#include "mpsphere/functional.hpp"
#include "mpsphere/hilbert_pair.hpp"

namespace oracle {

using mps::Mat;
using mps::Vec;

// Richardson-extrapolated central second difference of g at 0.
inline double secondDerivative(const std::function<double(double)>& g, double h) {
  auto d = [&](double s) { return (g(s) - 2.0 * g(0.0) + g(-s)) / (s * s); };
  return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

inline double firstDerivative(const std::function<double(double)>& g, double h) {
  auto d = [&](double s) { return (g(s) - g(-s)) / (2.0 * s); };
  return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

// Continuum mountain-pass solution on [0, L] with Neumann ends, peak at x = 0:
//   u'' = -lambda u - rho u^{p-1},  u'(0) = u'(L) = 0,  int u^2 = mu.
// Shooting in (a = u(0), lambda) with RK4 and a Newton iteration on a
// finite-difference Jacobian.
struct ShootingSolution {
  double a = 0.0;
  double lambda = 0.0;
  double value = 0.0;  // 1/2 int u'^2 - rho/p int u^p
  double residual = 0.0;
  bool converged = false;
};

inline ShootingSolution shootNeumann(double rho, double p, double mu, double L, double a0, double lambda0,
                                     int steps = 20000) {
  struct Out {
    double slope, mass, energy;
  };
  auto integrate = [&](double a, double lam) {
    // y = (u, u', int u^2, int u'^2, int u^p)
    auto rhs = [&](const Eigen::Matrix<double, 5, 1>& y) {
      Eigen::Matrix<double, 5, 1> f;
      double u = y(0), v = y(1);
      f << v, -lam * u - rho * std::pow(std::abs(u), p - 2.0) * u, u * u, v * v, std::pow(std::abs(u), p);
      return f;
    };
    Eigen::Matrix<double, 5, 1> y;
    y << a, 0.0, 0.0, 0.0, 0.0;
    double h = L / steps;
    for (int i = 0; i < steps; ++i) {
      auto k1 = rhs(y);
      auto k2 = rhs(y + 0.5 * h * k1);
      auto k3 = rhs(y + 0.5 * h * k2);
      auto k4 = rhs(y + h * k3);
      y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return Out{y(1), y(2), 0.5 * y(3) - rho / p * y(4)};
  };
  ShootingSolution s;
  double a = a0, lam = lambda0;
  for (int it = 0; it < 60; ++it) {
    Out o = integrate(a, lam);
    Eigen::Vector2d F(o.slope, o.mass - mu);
    s.residual = F.norm();
    if (s.residual < 1e-13) {
      s.converged = true;
      break;
    }
    double ha = 1e-7 * std::max(1.0, std::abs(a)), hl = 1e-7 * std::max(1.0, std::abs(lam));
    Out oa = integrate(a + ha, lam), ol = integrate(a, lam + hl);
    Eigen::Matrix2d J;
    J << (oa.slope - o.slope) / ha, (ol.slope - o.slope) / hl, (oa.mass - o.mass) / ha, (ol.mass - o.mass) / hl;
    Eigen::Vector2d step = J.fullPivLu().solve(-F);
    a += step(0);
    lam += step(1);
  }
  Out o = integrate(a, lam);
  s.a = a;
  s.lambda = lam;
  s.value = o.energy;
  s.converged = s.converged || s.residual < 1e-10;
  return s;
}

// phi(u) = 1/2 u^T Q u on the round sphere: minima at +-e1, mountain pass through +-e2.
inline Mat diagonal(std::initializer_list<double> q) {
  Mat Q = Mat::Zero(q.size(), q.size());
  int i = 0;
  for (double x : q) Q(i, i) = x, ++i;
  return Q;
}

// Family A - rho B with A = 1/2 u^T QA u, B = 1/2 u^T QB u, QB >= 0.
inline std::unique_ptr<mps::RhoFamily> quadraticFamily(const mps::HilbertPair& pair, const Mat& QA, const Mat& QB,
                                                       double rhoMin, double rhoMax) {
  auto A = std::make_shared<mps::QuadraticFunctional>(pair, QA);
  auto B = std::make_shared<mps::QuadraticFunctional>(pair, QB);
  return std::make_unique<mps::RhoFamily>(A, B, rhoMin, rhoMax,
                                          [](double, double mu) { return std::sqrt(mu) * (1.0 + 1e-12); }, true);
}

// Rotation angle of parallel transport around a geodesic triangle on the round
// sphere of radius r equals its area / r^2 (Gauss-Bonnet).
inline double sphericalTriangleArea(const Vec& a, const Vec& b, const Vec& c, double r) {
  Eigen::Vector3d x = a.head<3>().normalized(), y = b.head<3>().normalized(), z = c.head<3>().normalized();
  double num = std::abs(x.dot(y.cross(z)));
  double den = 1.0 + x.dot(y) + y.dot(z) + z.dot(x);
  return 2.0 * std::atan2(num, den) * r * r;
}

}  // namespace oracle
