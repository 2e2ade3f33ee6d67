#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpsphere/deformation.hpp"
#include "mpsphere/family.hpp"
#include "mpsphere/kernels.hpp"

namespace mps {

class NLSProblem;

// Nodes on S_mu joining pinned endpoints w1 = nodes.col(0), w2 = nodes.col(last).
struct DiscretePath {
  Mat nodes;
  double mu = 1.0;
  Vec values;  // phi at the nodes for the functional last evaluated

  int size() const { return static_cast<int>(nodes.cols()); }
  Vec w1() const { return nodes.col(0); }
  Vec w2() const { return nodes.col(nodes.cols() - 1); }
};

DiscretePath geodesicPath(const HilbertPair& pair, const Vec& w1, const Vec& w2, double mu, int m);
// Broken geodesic through the given points (first and last are the endpoints).
DiscretePath waypointPath(const HilbertPair& pair, const std::vector<Vec>& points, double mu, int m);

void evaluatePath(const ConstrainedFunctional& f, DiscretePath& path, Exec exec = Exec::Parallel);
double pathMax(const ConstrainedFunctional& f, const DiscretePath& path, Exec exec = Exec::Parallel);

// Equal H-geodesic arclength redistribution through exp/log interpolation.
void reparametrize(const HilbertPair& pair, DiscretePath& path);

struct StringOptions {
  int maxIters = 4000;
  double step = 0.05;
  double cap = 0.02;      // E-norm cap of a node move
  double tol = 1e-6;      // stop when the largest perpendicular gradient is below tol
  int climbIters = 4000;  // 0 disables the climbing step on the top node
  double climbStep = 0.5;
  double climbTol = 1e-9;
  Exec exec = Exec::Parallel;
};

struct StringResult {
  int iterations = 0;
  double perpResidual = 0.0;
  bool converged = false;
};

// Moves the highest interior node uphill along the path tangent and downhill across it.
// The node is replaced only when the sphere gradient there drops below climbTol.
// Returns the value at the converged node, or the plain node maximum when the climb fails.
double climbTop(const ConstrainedFunctional& f, const HilbertPair& pair, DiscretePath& path,
                const StringOptions& opts);

// Node-wise descent of the gradient component normal to the path, followed by reparametrization.
StringResult stringMethod(const ConstrainedFunctional& f, const HilbertPair& pair, DiscretePath& path,
                          const StringOptions& opts = {});

struct LevelEstimate {
  double c = 0.0;
  int bestIndex = -1;
  double endpointMax = 0.0;
  bool geometryOk = false;
};

// c = min over pool of max over nodes; geometryOk iff c > max(phi(w1), phi(w2)).
// With strict set, a violation throws GeometryFailure.
LevelEstimate estimateLevel(const ConstrainedFunctional& f, const std::vector<DiscretePath>& pool,
                            bool strict = false, Exec exec = Exec::Parallel);

struct SweepRow {
  double rho = 0.0;
  double c = 0.0;
  std::optional<double> slopeLeft;
  std::optional<double> slopeRight;
  bool differentiable = false;
  bool geometryOk = false;
  int iterations = 0;
  double perpResidual = 0.0;
};

std::vector<double> rhoGrid(double rhoMin, double rhoMax, int steps);

// Ascending sweep with warm starts; every optimized path joins the pool and the
// table is recomputed over the final pool, so c is non-increasing in rho.
std::vector<SweepRow> rhoSweep(const RhoFamily& family, const HilbertPair& pair, const std::vector<double>& grid,
                               std::vector<DiscretePath>& pool, const StringOptions& opts = {});

// rho_n = rho (1 - 2^{-n-2})
double rhoSchedule(double rho, int n);
// eps_n = (2 - slope)(rho - rho_n)
double epsSchedule(double rho, double slope, int n);
double alphaOne(double alpha);

struct TopsSelection {
  std::vector<DiscretePath> paths;
  std::vector<double> rhoN;
  std::vector<double> epsN;
  std::vector<double> bN;
  std::vector<double> aBound;
  std::vector<double> maxPhiRho;
  double K = 0.0;
  double observedMaxNorm = 0.0;
};

TopsSelection boundedTopsSelect(const RhoFamily& family, const HilbertPair& pair, double rho, double cRho,
                                double slope, int count, std::vector<DiscretePath>& pool,
                                const StringOptions& opts = {});

struct PSRecord {
  int n = 0;
  Vec u;
  int node = -1;
  double value = 0.0;
  double dualNorm = 0.0;
  double zeta = 0.0;
  int morseCount = 0;
  double lagrange = 0.0;
  double rho = 0.0;
  double epsN = 0.0;
  double norm = 0.0;
  double minNodal = 0.0;
  bool accepted = false;
};

struct ExtractOptions {
  bool positivize = true;
  CertifyOptions certify;
};

std::vector<PSRecord> extractPS(const RhoFamily& family, const HilbertPair& pair, double rho, double cRho,
                                const TopsSelection& tops, const ExtractOptions& opts = {});

struct CriticalPointReport {
  Vec u;
  double rho = 0.0;
  double value = 0.0;
  double lambda = 0.0;
  double elResidual = 0.0;
  double massError = 0.0;
  int morseIndex = 0;
  int freeMorseIndex = 0;
  int iterations = 0;
  bool converged = false;
  double minNodal = 0.0;
  double maxNodal = 0.0;
};

struct RefineOptions {
  double tol = 1e-10;
  double accept = 1e-8;
  int maxIters = 60;
};

// Projected Newton on the KKT system of Phi_rho restricted to S_mu.
CriticalPointReport refineAndCertifyLimit(const RhoFamily& family, const HilbertPair& pair, double rho,
                                          const Vec& start, double mu, const RefineOptions& opts = {});

// Nodal modulus; requires a modulus-invariant functional.
Vec positivize(const ConstrainedFunctional& f, const Vec& u);
DiscretePath positivize(const ConstrainedFunctional& f, const DiscretePath& path);

struct SolveOptions {
  StringOptions string;
  ExtractOptions extract;
  RefineOptions refine;
};

struct SolveReport {
  std::vector<SweepRow> sweep;
  double rho = 0.0;
  double cRho = 0.0;
  double slope = 0.0;
  double alpha1 = 0.0;
  TopsSelection tops;
  std::vector<PSRecord> records;
  CriticalPointReport limit;
};

SolveReport runSolve(const NLSProblem& problem, const SolveOptions& opts = {});

}  // namespace mps
