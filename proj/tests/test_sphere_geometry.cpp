#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mpsphere/errors.hpp"
#include "mpsphere/sphere_geometry.hpp"
#include "mpsphere/suite.hpp"
#include "oracles.hpp"

using namespace mps;

namespace {

HilbertPair roundPair(int d) { return HilbertPair(Mat::Identity(d, d), Mat::Identity(d, d)); }

}  // namespace

TEST(Geodesic, InitialData) {
  std::mt19937_64 rng(1);
  HilbertPair pair = randomPair(8, rng);
  SpherePoint p{pair.renormalize(randomVector(8, rng), 1.3), 1.3};
  Vec v = pair.projectTangentH(p, randomVector(8, rng));
  Geodesic g(pair, p.u, v, p.mu);
  EXPECT_LE((g.point(0.0) - p.u).norm(), 1e-15);
  EXPECT_LE((g.velocity(0.0) - v).norm(), 1e-14 * v.norm());
}

TEST(Geodesic, QuarterPeriod) {
  std::mt19937_64 rng(2);
  HilbertPair pair = randomPair(8, rng);
  double mu = 2.0;
  SpherePoint p{pair.renormalize(randomVector(8, rng), mu), mu};
  Vec v = pair.projectTangentH(p, randomVector(8, rng));
  v *= std::sqrt(mu) * M_PI / 2.0 / pair.normH(v);
  Geodesic g(pair, p.u, v, mu);
  EXPECT_LE(pair.normE(g.point(1.0) - v / g.omega()), 1e-12 * pair.normE(v));
}

TEST(Geodesic, Homogeneity) {
  std::mt19937_64 rng(3);
  HilbertPair pair = randomPair(10, rng);
  SpherePoint p{pair.renormalize(randomVector(10, rng), 1.0), 1.0};
  Vec v = pair.projectTangentH(p, randomVector(10, rng));
  for (int k = 0; k < 20; ++k) {
    double a = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    Vec lhs = Geodesic(pair, p.u, v, 1.0).point(a * t);
    Vec rhs = Geodesic(pair, p.u, a * v, 1.0).point(t);
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * std::max(1.0, lhs.norm()));
  }
}

TEST(Geodesic, EquationAndInvariants) {
  std::mt19937_64 rng(4);
  HilbertPair pair = randomPair(20, rng);
  double mu = 0.7;
  SpherePoint p{pair.renormalize(randomVector(20, rng), mu), mu};
  Vec v = pair.projectTangentH(p, randomVector(20, rng));
  Geodesic g(pair, p.u, v, mu);
  for (double t : {0.1, 0.5, 1.7}) {
    Vec x = g.point(t);
    EXPECT_NEAR(pair.innerH(x, x), mu, 1e-12 * mu);
    EXPECT_NEAR(pair.normH(g.velocity(t)), pair.normH(v), 1e-12 * pair.normH(v));
    EXPECT_LE(pair.normE(g.equationResidual(t)), 1e-10 * std::max(1.0, pair.normE(x)));
  }
  // Velocity against a finite difference of the position.
  auto comp = [&](double s) { return g.point(0.4 + s)(3); };
  EXPECT_NEAR(oracle::firstDerivative(comp, 1e-3), g.velocity(0.4)(3), 1e-8);
}

TEST(ExpMap, ZeroAndAntipode) {
  std::mt19937_64 rng(5);
  HilbertPair pair = randomPair(6, rng);
  double mu = 1.8;
  SpherePoint p{pair.renormalize(randomVector(6, rng), mu), mu};
  EXPECT_LE((expMap(pair, p, Vec::Zero(6)) - p.u).norm(), 1e-15);
  Vec v = pair.projectTangentH(p, randomVector(6, rng));
  v *= std::sqrt(mu) * M_PI / pair.normH(v);
  EXPECT_LE((expMap(pair, p, v) + p.u).norm(), 1e-12 * p.u.norm());
}

TEST(ExpMap, LogRoundTrip) {
  std::mt19937_64 rng(6);
  HilbertPair pair = randomPair(15, rng);
  double mu = 1.0;
  int tested = 0;
  for (int k = 0; k < 200; ++k) {
    Vec u0 = pair.renormalize(randomVector(15, rng), mu), u = pair.renormalize(randomVector(15, rng), mu);
    if (pair.innerH(u, u0) <= -0.9 * mu) continue;
    ++tested;
    SpherePoint o{u0, mu};
    Vec l = logMap(pair, o, u);
    EXPECT_LE(std::abs(pair.innerH(l, u0)), 1e-10);
    EXPECT_LE(pair.normE(expMap(pair, o, l) - u), 1e-9 * pair.normE(u));
  }
  EXPECT_GT(tested, 100);
}

TEST(LogMap, SpecialCases) {
  std::mt19937_64 rng(7);
  HilbertPair pair = randomPair(6, rng);
  SpherePoint o{pair.renormalize(randomVector(6, rng), 1.0), 1.0};
  EXPECT_LE(logMap(pair, o, o.u).norm(), 1e-15);
  Vec w = pair.renormalize(pair.projectTangentH(o, randomVector(6, rng)), 1.0);
  EXPECT_NEAR(pair.normH(logMap(pair, o, w)), M_PI / 2.0, 1e-12);
  EXPECT_THROW(logMap(pair, o, -o.u), Error);

  HilbertPair round = roundPair(3);
  SpherePoint e1{Vec::Unit(3, 0), 1.0};
  for (double theta : {0.3, 1.2, 2.9}) {
    Vec u(3);
    u << std::cos(theta), std::sin(theta), 0.0;
    Vec l = logMap(round, e1, u);
    EXPECT_LE((l - theta * Vec::Unit(3, 1)).norm(), 1e-12);
  }
}

TEST(Transport, ZeroLengthAndTangency) {
  std::mt19937_64 rng(8);
  HilbertPair pair = randomPair(10, rng);
  double mu = 1.2;
  SpherePoint o{pair.renormalize(randomVector(10, rng), mu), mu};
  Mat W = tangentBasis(pair, o).leftCols(3);
  RadialTransport same(pair, o, o.u);
  EXPECT_LE((same.apply(W) - W).norm(), 1e-14);
  Vec u = expMap(pair, o, 0.3 * pair.projectTangentH(o, randomVector(10, rng)));
  Mat T = transportFrame(pair, o, W, u);
  Mat G = T.transpose() * pair.gramE() * T;
  EXPECT_LE((G - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-5);
  for (int j = 0; j < 3; ++j) EXPECT_LE(std::abs(pair.innerH(u, T.col(j))), 1e-6);
}

TEST(Transport, RoundSphereCarriesVelocity) {
  HilbertPair pair = roundPair(4);
  double mu = 2.0;
  std::mt19937_64 rng(9);
  SpherePoint o{pair.renormalize(randomVector(4, rng), mu), mu};
  Vec v = pair.projectTangentH(o, randomVector(4, rng));
  Mat W = v / v.norm();
  Mat T = transportAlongGeodesic(pair, o, v, W);
  Vec target = Geodesic(pair, o.u, v, mu).velocity(1.0);
  EXPECT_LE((T.col(0) - target / target.norm()).norm(), 1e-8);
}

TEST(Transport, DifferenceBound) {
  std::mt19937_64 rng(10);
  HilbertPair pair = randomPair(12, rng);
  double mu = 1.0;
  GeometryConstants gc;
  gc.R = 4.0;
  gc.mu = mu;
  for (int k = 0; k < 50; ++k) {
    SpherePoint o{pair.renormalize(randomVector(12, rng), mu), mu};
    if (pair.normE(o.u) > gc.R - 1.0) continue;
    Vec v = pair.projectTangentH(o, randomVector(12, rng));
    v *= 0.5 * gc.delta0() / pair.normE(v);
    Vec u = expMap(pair, o, v);
    Mat W = tangentBasis(pair, o).leftCols(2);
    Mat T = transportFrame(pair, o, W, u);
    double lv = pair.normE(logMap(pair, o, u));
    for (int j = 0; j < 2; ++j)
      EXPECT_LE(pair.normE(T.col(j) - W.col(j)), gc.C() * lv * pair.normE(W.col(j)) * (1.0 + 1e-9));
  }
}

TEST(Transport, HolonomyMatchesSphericalArea) {
  HilbertPair pair = roundPair(3);
  for (double r : {1.0, std::sqrt(2.5)}) {
    double mu = r * r;
    std::vector<Vec> corners = {Vec::Unit(3, 0) * r, Vec(Vec::Unit(3, 1) * r),
                                Vec((Vec::Unit(3, 0) + Vec::Unit(3, 1) + Vec::Unit(3, 2)).normalized() * r)};
    Vec w0 = pair.projectTangentH(SpherePoint{corners[0], mu}, Vec::Unit(3, 2));
    w0.normalize();
    Mat w = w0;
    for (int leg = 0; leg < 3; ++leg) {
      SpherePoint a{corners[leg], mu};
      Vec v = logMap(pair, a, corners[(leg + 1) % 3]);
      w = transportAlongGeodesic(pair, a, v, w, 4000);
    }
    double angle = std::acos(std::clamp(w.col(0).normalized().dot(w0), -1.0, 1.0));
    double area = oracle::sphericalTriangleArea(corners[0], corners[1], corners[2], r);
    EXPECT_NEAR(angle, area / mu, 1e-6);
  }
}

TEST(Transport, HolonomyDefect) {
  std::mt19937_64 rng(11);
  HilbertPair round = roundPair(5);
  SpherePoint o{round.renormalize(randomVector(5, rng), 1.0), 1.0};
  Mat W = tangentBasis(round, o).leftCols(2);
  EXPECT_LE(holonomyDefect(round, o, o.u, W, 0.01), 1e-8);

  HilbertPair pair = randomPair(9, rng);
  SpherePoint q{pair.renormalize(randomVector(9, rng), 1.0), 1.0};
  Mat Wq = tangentBasis(pair, q).leftCols(2);
  Vec v = pair.projectTangentH(q, randomVector(9, rng));
  Vec u = expMap(pair, q, v * (0.01 / pair.normE(v)));
  double tau = 0.01;
  GeometryConstants gc;
  gc.R = pair.normE(q.u) + 1.5;
  gc.mu = 1.0;
  double R = gc.R;
  double bound = (3.0 + std::sqrt(2.0)) * gc.C() * (2.0 * 0.01 + tau) + (1.0 + std::sqrt(2.0)) * R * tau / gc.mu;
  EXPECT_LE(holonomyDefect(pair, q, u, Wq, tau), bound);
}

TEST(GeometryConstants, Delta1Scaling) {
  GeometryConstants gc;
  gc.R = 3.0;
  gc.mu = 1.0;
  gc.M = 50.0;
  gc.K = 5.0;
  for (double alpha : {1.0, 0.5}) {
    gc.alpha = alpha;
    double b = 0.01;
    EXPECT_NEAR(gc.delta1(2.0 * b) / gc.delta1(b), std::pow(2.0, 1.0 / alpha), 1e-12);
    EXPECT_LE(gc.delta1(1e6), 1.0);
  }
  EXPECT_LE(gc.delta3(0.1), gc.delta2(0.1));
  EXPECT_LE(gc.delta2(0.1), gc.delta1(0.1));
  EXPECT_LE(gc.tmax(gc.delta3(0.1)), gc.delta3(0.1) / 4.0);
}

TEST(GeometrySuite, SmallRun) {
  for (const auto& c : geometrySuite(8, 5, 42)) EXPECT_TRUE(c.pass()) << c.name << " measured=" << c.measured;
}
