#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "mpsphere/errors.hpp"
#include "mpsphere/io.hpp"
#include "mpsphere/minmax.hpp"
#include "mpsphere/problems.hpp"
#include "mpsphere/sphere_geometry.hpp"
#include "mpsphere/suite.hpp"
#include "oracles.hpp"

using namespace mps;

namespace {

ProblemConfig intervalConfig(int d) {
  ProblemConfig c;
  c.d = d;
  c.rhoMin = 1.0;
  c.rhoMax = 1.5;
  return c;
}

Vec smoothProfile(const NLSProblem& prob, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double a1 = U(rng), a2 = 0.5 * U(rng), a3 = 0.3 * U(rng);
  Vec u(prob.dim());
  for (int i = 0; i < prob.dim(); ++i) {
    double x = prob.mesh().nodeX[i];
    u(i) = 1.0 + a1 * std::cos(M_PI * x) + a2 * std::cos(2 * M_PI * x) + a3 * std::cos(5 * M_PI * x);
  }
  return prob.pair().renormalize(u, prob.mu());
}

double formNormE(const HilbertPair& pair, const Mat& D) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (D + D.transpose()), pair.gramE(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Problems, ConstantIntegrals) {
  ProblemConfig cfg = intervalConfig(50);
  cfg.mu = 1.7;
  cfg.L = 2.0;
  NLSProblem prob(cfg);
  Vec u = Vec::Constant(prob.dim(), std::sqrt(cfg.mu / cfg.L));
  EXPECT_NEAR(prob.pair().innerH(u, u), cfg.mu, 1e-12);
  EXPECT_NEAR(prob.family().A().value(u), 0.0, 1e-12);
  EXPECT_NEAR(prob.family().B().value(u), cfg.L * std::pow(cfg.mu / cfg.L, cfg.p / 2.0) / cfg.p, 1e-12);
}

TEST(Problems, PowerGradientAndHessian) {
  NLSProblem prob(intervalConfig(40));
  std::mt19937_64 rng(2);
  const auto& B = prob.family().B();
  for (int k = 0; k < 5; ++k) {
    Vec u = smoothProfile(prob, rng);
    Vec w = prob.pair().solveE(smoothProfile(prob, rng));
    w /= prob.pair().normE(w);
    auto g = [&](double t) { return B.value(u + t * w); };
    double fd = oracle::firstDerivative(g, 1e-3);
    double ex = B.gradDual(u).dot(w);
    EXPECT_LE(std::abs(fd - ex), 1e-6 * std::abs(ex));
    auto gp = [&](double t) { return B.gradDual(u + t * w).dot(w); };
    double fd2 = oracle::firstDerivative(gp, 1e-3);
    double ex2 = B.hessAction(u, w).dot(w);
    EXPECT_LE(std::abs(fd2 - ex2), 1e-6 * std::abs(ex2));
    EXPECT_LE((B.hessian(u) * w - B.hessAction(u, w)).norm(), 1e-10 * B.hessAction(u, w).norm());
  }
}

TEST(Problems, PowerNonnegativeAndEven) {
  NLSProblem prob(intervalConfig(30));
  std::mt19937_64 rng(3);
  const auto& B = prob.family().B();
  for (int k = 0; k < 1000; ++k) {
    Vec u = randomVector(prob.dim(), rng);
    EXPECT_GE(B.value(u), 0.0);
  }
  Vec u = randomVector(prob.dim(), rng);
  PhiRho phi = prob.family().at(1.3);
  EXPECT_EQ(phi.value(u), phi.value(Vec(-u)));
  EXPECT_TRUE(phi.modulusInvariant());
}

TEST(Problems, HolderConstants) {
  NLSProblem prob(intervalConfig(40));
  double rho = 1.2;
  HolderConstants h3 = prob.holderConstants(rho, 3.0), h6 = prob.holderConstants(rho, 6.0);
  EXPECT_LT(h3.M, h6.M);
  EXPECT_LE(h3.K, h6.K);
  EXPECT_DOUBLE_EQ(h3.alpha, 1.0);

  PhiRho phi = prob.family().at(rho);
  const HilbertPair& pair = prob.pair();
  std::mt19937_64 rng(4);
  double R = 4.0;
  double M = phi.holderM(R), K = phi.boundK(R, prob.mu());
  for (int k = 0; k < 500; ++k) {
    Vec x = smoothProfile(prob, rng) * std::uniform_real_distribution<double>(0.1, 1.5)(rng);
    Vec y = x + 0.05 * smoothProfile(prob, rng);
    if (pair.normE(x) > R || pair.normE(y) > R) continue;
    double dist = pair.normE(x - y);
    EXPECT_LE(pair.dualNorm(phi.gradDual(x) - phi.gradDual(y)), M * dist);
    if (k % 10 == 0) EXPECT_LE(formNormE(pair, phi.hessian(x) - phi.hessian(y)), M * dist);
  }
  for (int k = 0; k < 40; ++k) {
    Vec u = smoothProfile(prob, rng);
    if (pair.normE(u) > R) continue;
    SpherePoint p{u, prob.mu()};
    EXPECT_LE(pair.dualNorm(phi.gradDual(u)), K);
    EXPECT_LE(formNormE(pair, d2phiMatrix(phi, pair, p)), K);
  }
}

TEST(Problems, Endpoints) {
  ProblemConfig cfg = intervalConfig(200);
  cfg.rhoMax = 3.0;
  NLSProblem prob(cfg);
  EndpointScan scan;
  auto [w1, w2] = prob.endpoints(&scan);
  EXPECT_TRUE(prob.pair().onSphere(w1, cfg.mu, 1e-12));
  EXPECT_TRUE(prob.pair().onSphere(w2, cfg.mu, 1e-12));
  EXPECT_GT(scan.chosenWidth, 0.0);
  double prev = 1e300;
  for (double rho : rhoGrid(1.0, 3.0, 21)) {
    PhiRho phi = prob.family().at(rho);
    EXPECT_LT(phi.value(w2), phi.value(w1));
    EXPECT_LT(phi.value(w2), prev);
    prev = phi.value(w2);
  }
  Vec spike = prob.spikeProfile(0.05);
  for (double rho : {1.0, 1.5, 2.5}) {
    PhiRho phi = prob.family().at(rho);
    EXPECT_LT(phi.value(spike), phi.value(w1));
  }
}

TEST(Problems, EndpointGeometryFailure) {
  ProblemConfig cfg = intervalConfig(60);
  cfg.spikeMargin = 1e9;
  NLSProblem prob(cfg);
  try {
    prob.endpoints();
    FAIL() << "expected GeometryFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GeometryFailure);
  }
}

TEST(Problems, ConstantSolutionOracle) {
  ProblemConfig cfg = intervalConfig(120);
  for (double mu : {1.0, 0.5}) {
    cfg.mu = mu;
    NLSProblem prob(cfg);
    for (double rho : {1.2, 3.0, 10.0}) {
      ConstantSolution cs = prob.constantSolutionOracle(rho);
      PhiRho phi = prob.family().at(rho);
      SpherePoint p{cs.u, mu};
      EXPECT_LE(eulerLagrangeResidual(phi, prob.pair(), p), 1e-10);
      EXPECT_NEAR(cs.modelLambda, rho * std::pow(mu / cfg.L, (cfg.p - 2.0) / 2.0), 1e-12);
      EXPECT_NEAR(-lagrangeEstimate(phi, p), cs.modelLambda, 1e-10);
      // Continuum mode count, then a dense eigensolve of the discrete linearization.
      int continuum = 0;
      for (int k = 1; k < 50; ++k)
        if (k * k * M_PI * M_PI / (cfg.L * cfg.L) < (cfg.p - 2.0) * cs.modelLambda) ++continuum;
      EXPECT_EQ(cs.morseIndex, continuum);
      EXPECT_EQ(approxMorseIndex(phi, prob.pair(), p, 0.0).count, cs.morseIndex);
      EXPECT_EQ(approxMorseIndex(phi, prob.pair(), p, 0.0, true).count, cs.freeMorseIndex);
    }
  }
  cfg.mu = 1e-8;
  NLSProblem tiny(cfg);
  EXPECT_LT(tiny.constantSolutionOracle(1.0).modelLambda, 1e-20);
}

TEST(Problems, ConstantOracleRejectsOtherSettings) {
  ProblemConfig cfg = intervalConfig(40);
  cfg.bc = "dirichlet";
  NLSProblem prob(cfg);
  EXPECT_THROW(prob.constantSolutionOracle(1.0), Error);
}

TEST(Problems, StarGraphAssembly) {
  ProblemConfig cfg;
  cfg.type = "star";
  cfg.edges = {1.0, 0.5, 2.0};
  cfg.d = 91;
  cfg.rhoMin = 3.0;
  cfg.rhoMax = 4.0;
  NLSProblem prob(cfg);
  EXPECT_NEAR(prob.mesh().totalLength, 3.5, 1e-12);
  Vec one = Vec::Ones(prob.dim());
  EXPECT_NEAR(prob.pair().innerH(one, one), 3.5, 1e-12);
  EXPECT_NEAR(prob.family().A().value(one), 0.0, 1e-12);
  // Kirchhoff: the vertex row of the stiffness part annihilates constants.
  Vec Kone = (prob.pair().gramE() - prob.pair().gramH()) * one;
  EXPECT_LE(Kone.cwiseAbs().maxCoeff(), 1e-10);
  auto [w1, w2] = prob.endpoints();
  PhiRho phi = prob.family().at(cfg.rhoMin);
  EXPECT_LT(phi.value(w2), phi.value(w1));
}

TEST(Problems, DirichletWell) {
  ProblemConfig cfg = intervalConfig(80);
  cfg.bc = "dirichlet";
  cfg.potential.kind = "well";
  cfg.potential.V0 = 5.0;
  cfg.potential.a = 0.2;
  cfg.potential.b = 0.5;
  NLSProblem prob(cfg);
  EXPECT_EQ(prob.dim(), 80);
  EXPECT_DOUBLE_EQ(cfg.potential(0.3), -5.0);
  EXPECT_DOUBLE_EQ(cfg.potential(0.7), 0.0);
  auto [w1, w2] = prob.endpoints();
  EXPECT_TRUE(prob.pair().onSphere(w1, cfg.mu));
  PhiRho phi = prob.family().at(1.0);
  EXPECT_LT(phi.value(w2), phi.value(w1));
}

TEST(Problems, ConfigValidation) {
  ProblemConfig cfg = intervalConfig(40);
  cfg.p = 6.0;
  EXPECT_THROW(NLSProblem{cfg}, Error);
  cfg = intervalConfig(40);
  cfg.bc = "periodic-ish";
  EXPECT_THROW(NLSProblem{cfg}, Error);
  Json j = configToJson(intervalConfig(40));
  EXPECT_EQ(configFromJson(j).d, 40);
  j["unknown_key"] = 1;
  try {
    configFromJson(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(exitCodeFor(e.kind()), 2);
  }
}

TEST(Problems, TransferBetweenMeshes) {
  NLSProblem coarse(intervalConfig(51)), fine(intervalConfig(101));
  Vec u(coarse.dim());
  for (int i = 0; i < coarse.dim(); ++i) u(i) = 2.0 * coarse.mesh().nodeX[i] + 1.0;
  Vec v = fine.transferFrom(coarse, u);
  EXPECT_NEAR(fine.pair().innerH(v, v), fine.mu(), 1e-12);
  double scale = v(0);
  for (int i = 0; i < fine.dim(); ++i) EXPECT_NEAR(v(i), scale * (2.0 * fine.mesh().nodeX[i] + 1.0), 1e-12);
}

TEST(Problems, ShootingOracleSelfCheck) {
  auto s = oracle::shootNeumann(1.2, 8.0, 1.0, 1.0, 1.377, -2.718);
  ASSERT_TRUE(s.converged);
  EXPECT_NEAR(s.value, -0.1091987266, 1e-8);
  EXPECT_NEAR(s.lambda, -2.718154, 1e-5);
}
