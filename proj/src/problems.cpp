#include "mpsphere/problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mpsphere/errors.hpp"
#include "mpsphere/functional.hpp"

namespace mps {

namespace {

constexpr int kGauss = 3;
const double kGaussX[kGauss] = {0.5 - 0.1 * 3.872983346207417, 0.5, 0.5 + 0.1 * 3.872983346207417};
const double kGaussW[kGauss] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double nodal(const Vec& u, int i) { return i < 0 ? 0.0 : u(i); }

}  // namespace

Mesh1D intervalMesh(double L, int d, const std::string& bc) {
  Mesh1D m;
  m.ndof = d;
  m.totalLength = L;
  if (bc == "neumann") {
    if (d < 2) throw Error(ErrorKind::Config, "Neumann interval needs d >= 2");
    double h = L / (d - 1);
    for (int i = 0; i < d; ++i) {
      m.nodeX.push_back(i * h);
      m.nodeEdge.push_back(0);
    }
    for (int i = 0; i + 1 < d; ++i) m.elements.push_back({i, i + 1, h, i * h, 0});
  } else if (bc == "dirichlet") {
    if (d < 1) throw Error(ErrorKind::Config, "Dirichlet interval needs d >= 1");
    double h = L / (d + 1);
    for (int i = 0; i < d; ++i) {
      m.nodeX.push_back((i + 1) * h);
      m.nodeEdge.push_back(0);
    }
    for (int k = 0; k <= d; ++k) m.elements.push_back({k - 1, k < d ? k : -1, h, k * h, 0});
  } else {
    throw Error(ErrorKind::Config, "unknown boundary condition '" + bc + "'");
  }
  return m;
}

Mesh1D starMesh(const std::vector<double>& edges, int d) {
  const int ne = static_cast<int>(edges.size());
  if (ne < 2) throw Error(ErrorKind::Config, "star graph needs at least two edges");
  if (d < 1 + ne) throw Error(ErrorKind::Config, "star graph needs at least one dof per edge");
  Mesh1D m;
  m.ndof = d;
  m.nodeX.push_back(0.0);
  m.nodeEdge.push_back(-1);
  int rest = d - 1;
  int next = 1;
  for (int e = 0; e < ne; ++e) {
    if (!(edges[e] > 0.0)) throw Error(ErrorKind::Config, "edge lengths must be positive");
    int me = rest / ne + (e < rest % ne ? 1 : 0);
    double h = edges[e] / me;
    int prev = 0;
    for (int j = 1; j <= me; ++j) {
      m.nodeX.push_back(j * h);
      m.nodeEdge.push_back(e);
      m.elements.push_back({prev, next, h, (j - 1) * h, e});
      prev = next++;
    }
    m.totalLength += edges[e];
  }
  return m;
}

double PotentialSpec::operator()(double x) const {
  if (kind == "well") return (x >= a && x <= b) ? -V0 : 0.0;
  return 0.0;
}

double PotentialSpec::supAbs() const { return kind == "well" ? std::abs(V0) : 0.0; }

double PotentialSpec::minValue() const { return kind == "well" ? std::min(0.0, -V0) : 0.0; }

void validateConfig(const ProblemConfig& cfg) {
  std::ostringstream err;
  if (cfg.type != "interval" && cfg.type != "star") err << "type must be 'interval' or 'star'; ";
  if (cfg.type == "interval" && !(cfg.L > 0.0)) err << "L must be positive; ";
  if (cfg.type == "star" && cfg.edges.size() < 2) err << "star graph needs edge lengths; ";
  if (cfg.d < 3) err << "d must be at least 3; ";
  if (!(cfg.p > 6.0)) err << "p must exceed 2 + 4/N = 6; ";
  if (!(cfg.mu > 0.0)) err << "mu must be positive; ";
  if (!(cfg.rhoMin > 0.0 && cfg.rhoMin <= cfg.rhoMax)) err << "need 0 < rho_min <= rho_max; ";
  if (cfg.rhoSteps < 1) err << "rho_steps must be positive; ";
  if (cfg.bc != "neumann" && cfg.bc != "dirichlet") err << "bc must be 'neumann' or 'dirichlet'; ";
  if (cfg.potential.kind != "zero" && cfg.potential.kind != "well") err << "potential kind must be 'zero' or 'well'; ";
  if (cfg.pathNodes < 5) err << "path_nodes must be at least 5; ";
  if (cfg.psRecords < 1) err << "ps_records must be positive; ";
  if (!err.str().empty()) throw Error(ErrorKind::Config, err.str());
}

PowerFunctional::PowerFunctional(const Mesh1D& mesh, double p, double cInf) : mesh_(mesh), p_(p), cInf_(cInf) {}

double PowerFunctional::value(const Vec& u) const {
  double s = 0.0;
  for (const auto& e : mesh_.elements) {
    double ua = nodal(u, e.a), ub = nodal(u, e.b);
    for (int q = 0; q < kGauss; ++q) {
      double uq = (1.0 - kGaussX[q]) * ua + kGaussX[q] * ub;
      s += kGaussW[q] * e.h * std::pow(std::abs(uq), p_);
    }
  }
  return s / p_;
}

Vec PowerFunctional::gradDual(const Vec& u) const {
  Vec g = Vec::Zero(mesh_.ndof);
  for (const auto& e : mesh_.elements) {
    double ua = nodal(u, e.a), ub = nodal(u, e.b);
    double ga = 0.0, gb = 0.0;
    for (int q = 0; q < kGauss; ++q) {
      double x = kGaussX[q];
      double uq = (1.0 - x) * ua + x * ub;
      double f = kGaussW[q] * e.h * std::pow(std::abs(uq), p_ - 2.0) * uq;
      ga += f * (1.0 - x);
      gb += f * x;
    }
    if (e.a >= 0) g(e.a) += ga;
    if (e.b >= 0) g(e.b) += gb;
  }
  return g;
}

Vec PowerFunctional::hessAction(const Vec& u, const Vec& w) const {
  Vec r = Vec::Zero(mesh_.ndof);
  for (const auto& e : mesh_.elements) {
    double ua = nodal(u, e.a), ub = nodal(u, e.b);
    double wa = nodal(w, e.a), wb = nodal(w, e.b);
    double ra = 0.0, rb = 0.0;
    for (int q = 0; q < kGauss; ++q) {
      double x = kGaussX[q];
      double uq = (1.0 - x) * ua + x * ub;
      double wq = (1.0 - x) * wa + x * wb;
      double f = kGaussW[q] * e.h * (p_ - 1.0) * std::pow(std::abs(uq), p_ - 2.0) * wq;
      ra += f * (1.0 - x);
      rb += f * x;
    }
    if (e.a >= 0) r(e.a) += ra;
    if (e.b >= 0) r(e.b) += rb;
  }
  return r;
}

Mat PowerFunctional::hessian(const Vec& u) const {
  Mat Hm = Mat::Zero(mesh_.ndof, mesh_.ndof);
  for (const auto& e : mesh_.elements) {
    double ua = nodal(u, e.a), ub = nodal(u, e.b);
    double k[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int q = 0; q < kGauss; ++q) {
      double x = kGaussX[q];
      double uq = (1.0 - x) * ua + x * ub;
      double f = kGaussW[q] * e.h * (p_ - 1.0) * std::pow(std::abs(uq), p_ - 2.0);
      double N[2] = {1.0 - x, x};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k[i][j] += f * N[i] * N[j];
    }
    int idx[2] = {e.a, e.b};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (idx[i] >= 0 && idx[j] >= 0) Hm(idx[i], idx[j]) += k[i][j];
  }
  return Hm;
}

double PowerFunctional::holderM(double R) const {
  double cr = cInf_ * R;
  double lipGrad = (p_ - 1.0) * std::pow(cr, p_ - 2.0);
  double lipHess = (p_ - 1.0) * (p_ - 2.0) * std::pow(cInf_, p_ - 2.0) * std::pow(R, p_ - 3.0);
  return std::max(lipGrad, lipHess);
}

double PowerFunctional::boundK(double R, double mu) const {
  double cr = std::pow(cInf_ * R, p_ - 2.0);
  return std::max(cr * std::sqrt(mu), p_ * cr);
}

NLSProblem::NLSProblem(const ProblemConfig& cfg) : cfg_(cfg) {
  validateConfig(cfg_);
  mesh_ = cfg_.type == "star" ? starMesh(cfg_.edges, cfg_.d) : intervalMesh(cfg_.L, cfg_.d, cfg_.bc);
  const int d = mesh_.ndof;
  Mat K = Mat::Zero(d, d), M = Mat::Zero(d, d), MV = Mat::Zero(d, d);
  for (const auto& e : mesh_.elements) {
    int idx[2] = {e.a, e.b};
    double ke[2][2] = {{1.0 / e.h, -1.0 / e.h}, {-1.0 / e.h, 1.0 / e.h}};
    double me[2][2] = {{e.h / 3.0, e.h / 6.0}, {e.h / 6.0, e.h / 3.0}};
    double ve[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int q = 0; q < kGauss; ++q) {
      double x = kGaussX[q];
      double V = cfg_.potential(e.xa + x * e.h);
      double N[2] = {1.0 - x, x};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) ve[i][j] += kGaussW[q] * e.h * V * N[i] * N[j];
    }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (idx[i] >= 0 && idx[j] >= 0) {
          K(idx[i], idx[j]) += ke[i][j];
          M(idx[i], idx[j]) += me[i][j];
          MV(idx[i], idx[j]) += ve[i][j];
        }
  }
  pair_ = std::make_unique<HilbertPair>(K + M, M);
  Mat Einv = pair_->solveE(Mat(Mat::Identity(d, d)));
  cInf_ = std::sqrt(Einv.diagonal().maxCoeff());

  auto A = std::make_shared<QuadraticFunctional>(*pair_, K + MV);
  auto B = std::make_shared<PowerFunctional>(mesh_, cfg_.p, cInf_);
  double vneg = std::max(0.0, -cfg_.potential.minValue());
  // ||u||^2 = 2A(u) - int V u^2 + |u|^2 <= 2A(u) + mu (1 + max(0, -min V))
  auto bound = [vneg](double a, double mu) { return std::sqrt(std::max(0.0, 2.0 * a + mu * (1.0 + vneg))); };
  family_ = std::make_unique<RhoFamily>(A, B, cfg_.rhoMin, cfg_.rhoMax, bound, true);
}

HolderConstants NLSProblem::holderConstants(double rho, double R) const {
  PhiRho phi = family_->at(rho);
  return {phi.holderM(R), phi.boundK(R, cfg_.mu), phi.alpha()};
}

Vec NLSProblem::groundProfile() const {
  const int d = mesh_.ndof;
  Vec u(d);
  if (cfg_.type == "interval" && cfg_.bc == "dirichlet") {
    for (int i = 0; i < d; ++i) u(i) = std::sin(M_PI * mesh_.nodeX[i] / cfg_.L);
  } else {
    u.setOnes();
  }
  return pair_->renormalize(u, cfg_.mu);
}

Vec NLSProblem::spikeProfile(double width) const {
  const int d = mesh_.ndof;
  double center = (cfg_.type == "interval" && cfg_.bc == "dirichlet") ? 0.5 * cfg_.L : 0.0;
  Vec u(d);
  for (int i = 0; i < d; ++i) {
    double z = (mesh_.nodeX[i] - center) / width;
    u(i) = std::exp(-0.5 * z * z);
  }
  return pair_->renormalize(u, cfg_.mu);
}

std::pair<Vec, Vec> NLSProblem::endpoints(EndpointScan* scan) const {
  Vec w1 = groundProfile();
  PhiRho phi = family_->at(cfg_.rhoMin);
  double target = phi.value(w1) - cfg_.spikeMargin;
  double Lref = cfg_.type == "star" ? *std::max_element(cfg_.edges.begin(), cfg_.edges.end()) : cfg_.L;
  const int nscan = 80;
  EndpointScan local;
  for (int k = 0; k < nscan; ++k) {
    double width = Lref * std::pow(1.0 / 200.0, static_cast<double>(k) / (nscan - 1));
    Vec w2 = spikeProfile(width);
    double val = phi.value(w2);
    local.widths.push_back(width);
    local.values.push_back(val);
    if (val < target) {
      local.chosenWidth = width;
      if (scan) *scan = local;
      return {w1, w2};
    }
  }
  if (scan) *scan = local;
  std::ostringstream os;
  os << "no spike width in [" << Lref / 200.0 << ", " << Lref << "] drops below Phi(w1) - margin = " << target;
  throw Error(ErrorKind::GeometryFailure, os.str());
}

ConstantSolution NLSProblem::constantSolutionOracle(double rho) const {
  if (cfg_.type != "interval" || cfg_.bc != "neumann" || cfg_.potential.kind != "zero")
    throw Error(ErrorKind::Config, "constant-solution oracle needs a Neumann interval with V = 0");
  const int d = mesh_.ndof;
  double c = std::sqrt(cfg_.mu / cfg_.L);
  double cp2 = std::pow(c, cfg_.p - 2.0);
  ConstantSolution s;
  s.u = Vec::Constant(d, c);
  s.modelLambda = rho * cp2;
  s.lambda = -s.modelLambda;
  s.value = -rho / cfg_.p * cfg_.L * std::pow(c, cfg_.p);
  double h = cfg_.L / (d - 1);
  double shift = rho * (cfg_.p - 2.0) * cp2;
  s.morseIndex = 0;
  for (int k = 1; k < d; ++k) {
    double cs = std::cos(k * M_PI / (d - 1));
    double kappa = 6.0 / (h * h) * (1.0 - cs) / (2.0 + cs);
    s.tangentEigenvalues.push_back(kappa - shift);
    if (kappa < shift) ++s.morseIndex;
  }
  s.freeMorseIndex = s.morseIndex + 1;
  return s;
}

Vec NLSProblem::transferFrom(const NLSProblem& other, const Vec& u) const {
  const Mesh1D& om = other.mesh();
  int nedges = cfg_.type == "star" ? static_cast<int>(cfg_.edges.size()) : 1;
  std::vector<std::vector<std::pair<double, double>>> samples(nedges);
  bool dirichlet = cfg_.type == "interval" && cfg_.bc == "dirichlet";
  for (int i = 0; i < om.ndof; ++i) {
    if (om.nodeEdge[i] < 0) {
      for (int e = 0; e < nedges; ++e) samples[e].push_back({0.0, u(i)});
    } else {
      samples[om.nodeEdge[i]].push_back({om.nodeX[i], u(i)});
    }
  }
  if (dirichlet) {
    samples[0].push_back({0.0, 0.0});
    samples[0].push_back({cfg_.L, 0.0});
  }
  for (auto& s : samples) std::sort(s.begin(), s.end());
  Vec out(mesh_.ndof);
  for (int i = 0; i < mesh_.ndof; ++i) {
    const auto& s = samples[std::max(0, mesh_.nodeEdge[i])];
    double x = mesh_.nodeX[i];
    auto it = std::lower_bound(s.begin(), s.end(), std::make_pair(x, -1e300));
    if (it == s.begin()) {
      out(i) = s.front().second;
    } else if (it == s.end()) {
      out(i) = s.back().second;
    } else {
      auto lo = *(it - 1), hi = *it;
      double t = hi.first > lo.first ? (x - lo.first) / (hi.first - lo.first) : 0.0;
      out(i) = (1.0 - t) * lo.second + t * hi.second;
    }
  }
  return pair_->renormalize(out, cfg_.mu);
}

}  // namespace mps
