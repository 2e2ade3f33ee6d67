#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mpsphere/functional.hpp"
#include "mpsphere/hilbert_pair.hpp"
#include "mpsphere/kernels.hpp"

namespace mps {

struct SuiteCheck {
  std::string group;
  std::string name;
  double measured = 0.0;  // worst observed value
  double limit = 0.0;     // pass iff measured <= limit
  int samples = 0;
  int violations = 0;
  bool pass() const { return violations == 0 && measured <= limit; }
};

// H = I + B B^T / d with k = 8 columns, E = H + s T + C C^T / d with T the
// tridiagonal stiffness pattern; E >= H so the injection has norm <= 1.
HilbertPair randomPair(int d, std::mt19937_64& rng);
Vec randomVector(int d, std::mt19937_64& rng);

// Geodesic, exp/log, transport and the transport/tmax/velocity-drift lemmas over random pairs.
std::vector<SuiteCheck> geometrySuite(int d, int seeds, std::uint64_t seed);
// Geodesic geometry of one given pair.
std::vector<SuiteCheck> geometrySuite(const HilbertPair& pair, int samples, std::uint64_t seed);

// D^2 phi against second differences along geodesics; gradient and symmetry checks.
std::vector<SuiteCheck> secondOrderSuite(int probes, std::uint64_t seed);

// Descent certificates (beta/12 and beta/24 variants) on random quadratic saddles.
std::vector<SuiteCheck> descentSuite(int instances, std::uint64_t seed);

// The descent checks around points of an NLS run with a negative direction (beta = half the lowest eigenvalue).
std::vector<SuiteCheck> harvestedDescentSuite(const ConstrainedFunctional& f, const HilbertPair& pair,
                                              const std::vector<Vec>& points, double mu, int repeats,
                                              std::uint64_t seed);

// D^2 phi(u)[a,a] against second differences of phi along the radial retraction u + t a.
SuiteCheck retractionHessianCheck(const ConstrainedFunctional& f, const HilbertPair& pair, const Vec& u, double mu,
                                  int directions, std::uint64_t seed);

// Brute-force grid audit of covers of random boxes for n = 1, 2.
std::vector<SuiteCheck> coverSuite(int boxes, std::uint64_t seed);

struct CoverAudit {
  bool covered = true;
  int maxMultiplicity = 0;
  int gridPoints = 0;
};
struct CoverReport;
CoverAudit auditCover(const CoverReport& cover, const Vec& lo, const Vec& hi, int gridPerAxis);

std::vector<SuiteCheck> verifyLemmas(std::uint64_t seed, bool quick = false);

}  // namespace mps
