#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mpsphere/family.hpp"
#include "mpsphere/hilbert_pair.hpp"

namespace mps {

// P1 elements on an interval or a star graph.  A node index of -1 marks a
// homogeneous Dirichlet end.
struct Mesh1D {
  struct Element {
    int a;
    int b;
    double h;
    double xa;  // coordinate of end a along its edge
    int edge;
  };
  std::vector<Element> elements;
  std::vector<double> nodeX;
  std::vector<int> nodeEdge;
  int ndof = 0;
  double totalLength = 0.0;
};

Mesh1D intervalMesh(double L, int d, const std::string& bc);
// Three (or more) edges sharing dof 0 at the vertex; outer ends natural.
Mesh1D starMesh(const std::vector<double>& edges, int d);

struct PotentialSpec {
  std::string kind = "zero";  // "zero" or "well"
  double V0 = 0.0;
  double a = 0.0;
  double b = 0.0;

  double operator()(double x) const;
  double supAbs() const;
  double minValue() const;
};

struct ProblemConfig {
  std::string type = "interval";  // "interval" or "star"
  double L = 1.0;
  std::vector<double> edges;
  int d = 200;
  double p = 8.0;
  double mu = 1.0;
  double rhoMin = 1.0;
  double rhoMax = 3.0;
  int rhoSteps = 21;
  std::string bc = "neumann";
  PotentialSpec potential;
  std::uint64_t seed = 0;
  double rho = 1.2;          // solve point
  int pathNodes = 41;
  int pathIters = 4000;
  int psRecords = 8;
  double spikeMargin = 1.0;
  double refineTol = 1e-10;
};

void validateConfig(const ProblemConfig& cfg);

// B(u) = (1/p) int |u|^p with 3-point Gauss quadrature per element.
class PowerFunctional : public ConstrainedFunctional {
 public:
  PowerFunctional(const Mesh1D& mesh, double p, double cInf);

  int dim() const override { return mesh_.ndof; }
  double value(const Vec& u) const override;
  Vec gradDual(const Vec& u) const override;
  Vec hessAction(const Vec& u, const Vec& w) const override;
  Mat hessian(const Vec& u) const override;
  double holderM(double R) const override;
  double boundK(double R, double mu) const override;
  double alpha() const override { return 1.0; }

 private:
  Mesh1D mesh_;
  double p_;
  double cInf_;
};

struct HolderConstants {
  double M;
  double K;
  double alpha;
};

struct EndpointScan {
  std::vector<double> widths;
  std::vector<double> values;
  double chosenWidth = 0.0;
};

struct ConstantSolution {
  Vec u;
  double lambda;       // (1/mu) Phi'(u).u
  double modelLambda;  // frequency of -u'' + lambda u = rho |u|^{p-2} u, equal to -lambda
  double value;
  std::vector<double> tangentEigenvalues;  // D^2 eigenvalues relative to the mass form, k >= 1
  int morseIndex;
  int freeMorseIndex;
};

class NLSProblem {
 public:
  explicit NLSProblem(const ProblemConfig& cfg);

  const ProblemConfig& config() const { return cfg_; }
  const Mesh1D& mesh() const { return mesh_; }
  const HilbertPair& pair() const { return *pair_; }
  const RhoFamily& family() const { return *family_; }
  int dim() const { return mesh_.ndof; }
  double mu() const { return cfg_.mu; }
  // Discrete embedding constant: max_i |u_i| <= cInf ||u||.
  double cInf() const { return cInf_; }

  HolderConstants holderConstants(double rho, double R) const;

  // w1 (near-constant or ground mode) and w2 (concentrated spike); neither depends on rho.
  std::pair<Vec, Vec> endpoints(EndpointScan* scan = nullptr) const;
  Vec groundProfile() const;
  Vec spikeProfile(double width) const;

  ConstantSolution constantSolutionOracle(double rho) const;

  // Piecewise-linear interpolation of a nodal vector from another mesh of the same domain.
  Vec transferFrom(const NLSProblem& other, const Vec& u) const;

 private:
  ProblemConfig cfg_;
  Mesh1D mesh_;
  std::unique_ptr<HilbertPair> pair_;
  std::unique_ptr<RhoFamily> family_;
  double cInf_ = 1.0;
};

}  // namespace mps
