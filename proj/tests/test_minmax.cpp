#include <gtest/gtest.h>

#include "mpsphere/errors.hpp"
#include "mpsphere/minmax.hpp"
#include "mpsphere/problems.hpp"
#include "oracles.hpp"

using namespace mps;

namespace {

HilbertPair roundPair(int d) { return HilbertPair(Mat::Identity(d, d), Mat::Identity(d, d)); }

Vec e(int i) { return Vec::Unit(3, i); }

// Saddle of 1/2 (u1^2 + (2 - rho/2) u2^2 + 3 u3^2) between -e1 and e1 sits at e2 with value 1 - rho/4.
struct Toy {
  HilbertPair pair = roundPair(3);
  std::unique_ptr<RhoFamily> family =
      oracle::quadraticFamily(pair, oracle::diagonal({1.0, 2.0, 3.0}), oracle::diagonal({0.0, 0.5, 0.0}), 1.0, 1.5);
  DiscretePath start() const {
    return waypointPath(pair, {e(0), Vec((e(1) + e(2)).normalized()), Vec(-e(0))}, 1.0, 21);
  }
};

StringOptions fastOptions() {
  StringOptions o;
  o.maxIters = 3000;
  o.step = 0.2;
  o.cap = 0.05;
  o.tol = 1e-9;
  return o;
}

}  // namespace

TEST(Paths, GeodesicAndWaypoints) {
  HilbertPair pair = roundPair(3);
  DiscretePath g = geodesicPath(pair, e(0), e(1), 1.0, 11);
  EXPECT_EQ(g.size(), 11);
  EXPECT_EQ((g.w1() - e(0)).norm(), 0.0);
  EXPECT_EQ((g.w2() - e(1)).norm(), 0.0);
  Vec mid(3);
  mid << std::cos(M_PI / 4), std::sin(M_PI / 4), 0.0;
  EXPECT_LE((g.nodes.col(5) - mid).norm(), 1e-12);
  DiscretePath w = waypointPath(pair, {e(0), e(1), Vec(-e(0))}, 1.0, 21);
  EXPECT_LE((w.nodes.col(10) - e(1)).norm(), 1e-12);
  for (int i = 0; i < w.size(); ++i) EXPECT_NEAR(w.nodes.col(i).squaredNorm(), 1.0, 1e-12);
}

TEST(Paths, ReparametrizeEqualizesArclength) {
  HilbertPair pair = roundPair(3);
  Mat nodes(3, 6);
  double ts[6] = {0.0, 0.1, 0.15, 0.2, 1.0, M_PI / 2};
  for (int i = 0; i < 6; ++i) nodes.col(i) = std::cos(ts[i]) * e(0) + std::sin(ts[i]) * e(2);
  DiscretePath p{nodes, 1.0, Vec()};
  reparametrize(pair, p);
  for (int i = 0; i < 6; ++i) {
    double t = M_PI / 2 * i / 5.0;
    EXPECT_LE((p.nodes.col(i) - (std::cos(t) * e(0) + std::sin(t) * e(2))).norm(), 1e-12);
  }
}

TEST(Level, SaddleValueOfToy) {
  Toy toy;
  double rho = 1.2;
  PhiRho phi = toy.family->at(rho);
  DiscretePath p = toy.start();
  StringResult sr = stringMethod(phi, toy.pair, p, fastOptions());
  EXPECT_TRUE(sr.converged);
  std::vector<DiscretePath> pool{p};
  LevelEstimate est = estimateLevel(phi, pool, true);
  EXPECT_NEAR(est.c, 1.0 - rho / 4.0, 1e-4);
  EXPECT_TRUE(est.geometryOk);
  EXPECT_GT(est.c, est.endpointMax);
  // A worse path never raises the estimate.
  pool.push_back(toy.start());
  EXPECT_LE(estimateLevel(phi, pool).c, est.c);
  EXPECT_EQ(estimateLevel(phi, pool).bestIndex, 0);
}

TEST(Level, StrictGeometryFailure) {
  HilbertPair pair = roundPair(3);
  QuadraticFunctional f(pair, oracle::diagonal({3.0, 2.0, 1.0}));
  std::vector<DiscretePath> pool{geodesicPath(pair, e(0), e(1), 1.0, 9)};
  EXPECT_FALSE(estimateLevel(f, pool).geometryOk);
  try {
    estimateLevel(f, pool, true);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::GeometryFailure);
  }
}

TEST(Sweep, LinearToySlope) {
  Toy toy;
  std::vector<DiscretePath> pool{toy.start()};
  auto grid = rhoGrid(1.0, 1.5, 6);
  ASSERT_EQ(grid.size(), 6u);
  auto rows = rhoSweep(*toy.family, toy.pair, grid, pool, fastOptions());
  for (size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].c, 1.0 - grid[i] / 4.0, 1e-4);
    if (i > 0) EXPECT_LE(rows[i].c, rows[i - 1].c + 1e-9);
    if (rows[i].slopeLeft) EXPECT_NEAR(*rows[i].slopeLeft, -0.25, 0.05 * 0.25);
  }
  EXPECT_FALSE(rows.front().differentiable);
  EXPECT_TRUE(rows[2].differentiable);
}

TEST(Sweep, ZeroBGivesConstantLevel) {
  HilbertPair pair = roundPair(3);
  auto fam = oracle::quadraticFamily(pair, oracle::diagonal({1.0, 2.0, 3.0}), Mat::Zero(3, 3), 1.0, 3.0);
  std::vector<DiscretePath> pool{waypointPath(pair, {e(0), Vec((e(1) + e(2)).normalized()), Vec(-e(0))}, 1.0, 21)};
  auto rows = rhoSweep(*fam, pair, rhoGrid(1.0, 3.0, 5), pool, fastOptions());
  for (const auto& r : rows) {
    EXPECT_NEAR(r.c, rows.front().c, 1e-12);
    if (r.slopeLeft) EXPECT_NEAR(*r.slopeLeft, 0.0, 1e-10);
  }
}

TEST(Schedules, Arithmetic) {
  double rho = 1.2, slope = -0.3;
  for (int n = 1; n < 8; ++n) {
    EXPECT_DOUBLE_EQ(rhoSchedule(rho, n), rho * (1.0 - std::pow(2.0, -n - 2)));
    EXPECT_NEAR(epsSchedule(rho, slope, n + 1) / epsSchedule(rho, slope, n), 0.5, 1e-12);
  }
  EXPECT_DOUBLE_EQ(alphaOne(1.0), 1.0 / 6.0);
  auto g = rhoGrid(1.0, 3.0, 21);
  EXPECT_EQ(g.size(), 21u);
  EXPECT_DOUBLE_EQ(g[10], 2.0);
}

TEST(Tops, ToyWithinBound) {
  Toy toy;
  std::vector<DiscretePath> pool{toy.start()};
  double rho = 1.2;
  auto rows = rhoSweep(*toy.family, toy.pair, rhoGrid(1.0, 1.5, 6), pool, fastOptions());
  double cRho = rows[2].c, slope = 0.5 * (*rows[2].slopeLeft + *rows[2].slopeRight);
  TopsSelection sel = boundedTopsSelect(*toy.family, toy.pair, rho, cRho, slope, 4, pool, fastOptions());
  ASSERT_EQ(sel.paths.size(), 4u);
  EXPECT_LE(sel.observedMaxNorm, sel.K);
  EXPECT_NEAR(sel.K, 1.0, 1e-9);
  for (size_t n = 0; n < 4; ++n) {
    EXPECT_LE(sel.maxPhiRho[n], cRho + sel.epsN[n]);
    if (n > 0) EXPECT_LT(sel.epsN[n], sel.epsN[n - 1]);
  }

  std::vector<PSRecord> recs = extractPS(*toy.family, toy.pair, rho, cRho, sel);
  ASSERT_EQ(recs.size(), 4u);
  for (const auto& r : recs) {
    ASSERT_TRUE(r.accepted);
    EXPECT_LE(r.dualNorm, 3.0 * std::pow(r.epsN, 1.0 / 6.0));
    EXPECT_LE(r.morseCount, 1);
    EXPECT_GE(r.minNodal, 0.0);
    EXPECT_NEAR(r.value, 1.0 - rho / 4.0, 1e-3);
  }

  CriticalPointReport lim = refineAndCertifyLimit(*toy.family, toy.pair, rho, recs.back().u, 1.0);
  EXPECT_TRUE(lim.converged);
  EXPECT_LE(lim.elResidual, 1e-10);
  EXPECT_NEAR(lim.value, 1.0 - rho / 4.0, 1e-12);
  EXPECT_NEAR(lim.lambda, 2.0 - rho / 2.0, 1e-10);
  EXPECT_EQ(lim.morseIndex, 1);
  EXPECT_GE(lim.freeMorseIndex, lim.morseIndex);
  EXPECT_LE(lim.freeMorseIndex, lim.morseIndex + 1);
}

TEST(Positivize, ModulusAndRequirement) {
  Toy toy;
  PhiRho phi = toy.family->at(1.2);
  Vec u(3);
  u << 0.6, -0.8, 0.0;
  Vec p = positivize(phi, u);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_EQ(phi.value(p), phi.value(u));
  Vec pos = u.cwiseAbs();
  EXPECT_EQ((positivize(phi, pos) - pos).norm(), 0.0);
  HilbertPair pair = roundPair(3);
  QuadraticFunctional plain(pair, Mat::Identity(3, 3));
  try {
    positivize(plain, u);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotSymmetric);
  }
}

TEST(Refine, ConstantNeumannStart) {
  ProblemConfig cfg;
  cfg.d = 80;
  cfg.rhoMin = 1.0;
  cfg.rhoMax = 1.5;
  NLSProblem prob(cfg);
  for (double rho : {1.2, 1.4}) {
    ConstantSolution cs = prob.constantSolutionOracle(rho);
    CriticalPointReport r = refineAndCertifyLimit(prob.family(), prob.pair(), rho, cs.u, cfg.mu);
    EXPECT_LE(r.elResidual, 1e-10);
    EXPECT_NEAR(-r.lambda, rho * std::pow(cfg.mu / cfg.L, (cfg.p - 2.0) / 2.0), 1e-10);
    EXPECT_EQ(r.morseIndex, cs.morseIndex);
    EXPECT_LE(r.morseIndex, r.freeMorseIndex);
    EXPECT_LE(r.freeMorseIndex, r.morseIndex + 1);
  }
}

TEST(Solve, SmallIntervalEndToEnd) {
  ProblemConfig cfg;
  cfg.d = 40;
  cfg.rhoMin = 1.1;
  cfg.rhoMax = 1.3;
  cfg.rhoSteps = 9;
  cfg.rho = 1.2;
  cfg.pathNodes = 25;
  cfg.pathIters = 1500;
  cfg.psRecords = 3;
  cfg.seed = 7;
  NLSProblem prob(cfg);
  SolveReport rep = runSolve(prob);
  for (size_t i = 1; i < rep.sweep.size(); ++i) EXPECT_LE(rep.sweep[i].c, rep.sweep[i - 1].c + 1e-9);
  ASSERT_EQ(rep.records.size(), 3u);
  double prevZeta = 1e300;
  for (const auto& r : rep.records) {
    EXPECT_TRUE(r.accepted);
    EXPECT_LE(r.dualNorm, 3.0 * r.zeta);
    EXPECT_LE(r.norm, rep.tops.K);
    EXPECT_LE(r.morseCount, 1);
    EXPECT_GE(r.minNodal, 0.0);
    EXPECT_LT(r.zeta, prevZeta);
    prevZeta = r.zeta;
    EXPECT_NEAR(prob.pair().innerH(r.u, r.u), cfg.mu, 1e-9 * cfg.mu);
  }
  EXPECT_LE(rep.limit.elResidual, 1e-8);
  EXPECT_EQ(rep.limit.morseIndex, 1);
  EXPECT_LE(rep.limit.freeMorseIndex, 2);
  EXPECT_GE(rep.limit.minNodal, 0.0);
  EXPECT_NEAR(rep.limit.value, -0.10919, 5e-3);
}

TEST(Solve, RejectsNonGridRho) {
  ProblemConfig cfg;
  cfg.d = 30;
  cfg.rhoMin = 1.0;
  cfg.rhoMax = 1.5;
  cfg.rhoSteps = 3;
  cfg.rho = 1.1;
  cfg.pathNodes = 9;
  cfg.pathIters = 50;
  NLSProblem prob(cfg);
  try {
    runSolve(prob);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::CertificationFailure);
  }
}
