#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpsphere/functional.hpp"
#include "mpsphere/kernels.hpp"
#include "mpsphere/sphere_geometry.hpp"

namespace mps {

// A map f: D -> S_mu sampled at parameter points of D (columns of params).
// Nodes flagged fixed belong to D_0 and are never moved.
struct DiscreteMap {
  Mat params;  // n x m
  Mat nodes;   // d x m
  double mu = 1.0;
  std::vector<char> fixed;

  int n() const { return static_cast<int>(params.rows()); }
  int size() const { return static_cast<int>(nodes.cols()); }
};

// Path t_i = i/(m-1) with pinned endpoints.
DiscreteMap pathMap(const Mat& nodes, double mu);

struct CoverReport {
  int n = 1;
  Mat centers;  // n x k
  double eps = 0.0;
  double innerRadius = 0.0;  // eps/4
  double outerRadius = 0.0;  // eps/2
  double spacing = 0.0;
  // Largest number of closed eps/2 balls sharing a point.
  int maxMultiplicity = 0;
  // Any N distinct closed balls have empty intersection: N = maxMultiplicity + 1.
  int N = 1;
  static int multiplicityBound(int n);  // ceil((2 sqrt(n+1) + 2)^n)
};

// D given as a finite point cloud (n x k) or as a box [lo, hi].
CoverReport buildCover(const Mat& points, double eps);
CoverReport buildCoverBox(const Vec& lo, const Vec& hi, double eps);

// Descent direction -P_u grad / ||P_u grad||, or nothing when ||P_u grad|| <= 1e-12.
std::optional<Vec> descentDirection(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p,
                                    const Mat& frame);

// phi(u) - phi(exp_u(t w)) evaluated as -int_0^t phi'(sigma).sigma' ds by
// Gauss-Legendre quadrature, which avoids cancellation for tiny t.
double geodesicDecrease(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p, const Vec& w,
                        double t);

struct DescentCertificate {
  Vec u;
  Vec direction;
  bool zeroCase = false;
  bool neighborhood = false;
  double beta = 0.0;
  double t = 0.0;
  double decrease = 0.0;        // integrated along the geodesic
  double directDecrease = 0.0;  // phi(u) - phi(exp_u(t w)) by subtraction
  double bound = 0.0;
  double violation = 0.0;  // max(0, bound - decrease)
  bool valid = false;
};

constexpr double kCertificateSlack = 1e-12;

// Second-order descent step at u near u0 with frame basis W (at u0).
// direction == nullopt uses the default choice; otherwise the given unit w in W(u).
DescentCertificate descentStep(const ConstrainedFunctional& f, const HilbertPair& pair, const GeometryConstants& gc,
                               const SpherePoint& u0, const Mat& basis, const Vec& u, double beta, double t,
                               const std::optional<Vec>& direction = std::nullopt);

struct NeighborhoodCheck {
  double gradGap;       // ||phi'(u) - phi'(z)|| in E'
  double gradLimit;     // beta t0 / 48
  double frameGap;      // ||T_u|_W - T_z|_W||
  double frameLimit;    // beta t0 / (48 K)
  bool holds() const { return gradGap < gradLimit && frameGap < frameLimit; }
};

NeighborhoodCheck neighborhoodAssertions(const ConstrainedFunctional& f, const HilbertPair& pair,
                                         const GeometryConstants& gc, const SpherePoint& u0, const Mat& basis,
                                         const Vec& u, const Vec& z, double beta, double t0);

// Neighborhood variant: z near a zero-direction point u, unit w in W(z), t in [t0, tmax).
// Throws HypothesisViolated when the quantitative continuity assertions fail.
DescentCertificate neighborhoodStep(const ConstrainedFunctional& f, const HilbertPair& pair,
                                    const GeometryConstants& gc, const SpherePoint& u0, const Mat& basis,
                                    const Vec& u, const Vec& z, const Vec& w, double beta, double t, double t0);

struct TraceRecord {
  int stage;
  int node;
  double phiBefore;
  double phiAfter;
  double displacement;
};

struct HomotopyResult {
  DiscreteMap eta;
  double t = 0.0;
  double nu = 0.0;
  std::vector<int> moved;
  std::vector<double> decrease;  // per node, integrated
  bool fixedOutside = true;
  bool nonIncreasing = true;
  bool decreaseOnK1 = true;
  bool displacementOk = true;
  double maxDisplacement = 0.0;
  bool ok() const { return fixedOutside && nonIncreasing && decreaseOnK1 && displacementOk; }
};

// Local homotopy eta(t, x) = exp_{f(x)}(t g(x) f3(x)) evaluated at one t.
HomotopyResult homotopyDeform(const ConstrainedFunctional& f, const HilbertPair& pair, const GeometryConstants& gc,
                              const DiscreteMap& map, const std::vector<int>& K1, const SpherePoint& u0,
                              const Mat& basis, double beta, double nu, double t0, double t,
                              Exec exec = Exec::Parallel);

struct IterateResult {
  DiscreteMap map;
  CoverReport cover;
  std::vector<int> anchors;
  std::vector<TraceRecord> trace;
  int stages = 0;
  double stepT = 0.0;
  double tau = 0.0;
  double requiredDecrease = 0.0;  // beta delta^2 / (864 N^2)
  double minDecreaseOnK2 = 0.0;
  double maxDisplacement = 0.0;
  double maxStageDisplacement = 0.0;
  bool fixedOutside = true;
  bool nonIncreasing = true;
  bool decreaseOnK2 = true;
  bool displacementOk = true;
  bool stageDisplacementOk = true;
  bool ok() const { return fixedOutside && nonIncreasing && decreaseOnK2 && displacementOk && stageDisplacementOk; }
};

IterateResult iterateDeform(const ConstrainedFunctional& f, const HilbertPair& pair, const GeometryConstants& gc,
                            const DiscreteMap& map, const std::vector<int>& K2, double beta, double delta, double nu,
                            Exec exec = Exec::Parallel);

struct FirstOrderOptions {
  int hypothesisSamples = 8;
  std::uint64_t seed = 1;
  double armijo = 1e-4;
  int maxSteps = 10000;
};

struct FirstOrderResult {
  DiscreteMap map;
  std::vector<TraceRecord> trace;
  bool hypothesisHolds = true;
  double minSampledDualNorm = 0.0;
  bool unchangedLow = true;
  bool nonIncreasing = true;
  bool reachedTarget = true;
};

FirstOrderResult firstOrderDeform(const ConstrainedFunctional& f, const HilbertPair& pair, const DiscreteMap& map,
                                  const std::vector<int>& K3, double cTil, double epsTil, double muTil,
                                  const FirstOrderOptions& opts = {}, Exec exec = Exec::Parallel);

struct CertifyOptions {
  int maxRounds = 4;
  std::uint64_t seed = 1;
  Exec exec = Exec::Parallel;
};

struct CertifyResult {
  bool found = false;
  int node = -1;
  Vec u;
  double value = 0.0;
  double dualNorm = 0.0;
  int morseCount = 0;
  double beta = 0.0;
  double delta = 0.0;
  int kSize = 0;
  // Set when no node qualifies and the deformation pushes the family below c - eps.
  std::optional<DiscreteMap> witness;
  double witnessMax = 0.0;
  std::vector<TraceRecord> trace;
};

// Either a node of A = f(D) with value in [c-eps, c+eps], dual norm <= 3 eps^alpha1 and
// no (n+1)-dimensional eps^alpha1-negative subspace (the qualifying node closest in value to c),
// or a deformed family member with max < c - eps.
CertifyResult certifyMinimaxPoint(const ConstrainedFunctional& f, const HilbertPair& pair, const DiscreteMap& map,
                                  double c, double eps, double alpha1, double R, const CertifyOptions& opts = {});

}  // namespace mps
