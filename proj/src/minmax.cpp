#include "mpsphere/minmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mpsphere/errors.hpp"
#include "mpsphere/log.hpp"
#include "mpsphere/problems.hpp"
#include "mpsphere/sphere_geometry.hpp"

namespace mps {

namespace {

template <class Fn>
void forRange(int first, int last, Exec exec, Fn&& fn) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int j = first; j <= last; ++j) fn(j);
  } else {
    for (int j = first; j <= last; ++j) fn(j);
  }
}

}  // namespace

DiscretePath geodesicPath(const HilbertPair& pair, const Vec& w1, const Vec& w2, double mu, int m) {
  return waypointPath(pair, {w1, w2}, mu, m);
}

DiscretePath waypointPath(const HilbertPair& pair, const std::vector<Vec>& points, double mu, int m) {
  if (points.size() < 2 || m < 3) throw Error(ErrorKind::Config, "a path needs two endpoints and three nodes");
  const int legs = static_cast<int>(points.size()) - 1;
  DiscretePath path;
  path.mu = mu;
  path.nodes.resize(points[0].size(), m);
  std::vector<Vec> logs;
  for (int k = 0; k < legs; ++k) logs.push_back(logMap(pair, SpherePoint{points[k], mu}, points[k + 1]));
  for (int i = 0; i < m; ++i) {
    double s = static_cast<double>(i) * legs / (m - 1);
    int k = std::min(static_cast<int>(std::floor(s)), legs - 1);
    double a = s - k;
    path.nodes.col(i) = pair.renormalize(expMap(pair, SpherePoint{points[k], mu}, a * logs[k]), mu);
  }
  path.nodes.col(0) = points.front();
  path.nodes.col(m - 1) = points.back();
  return path;
}

void evaluatePath(const ConstrainedFunctional& f, DiscretePath& path, Exec exec) {
  path.values = nodeValues(f, path.nodes, exec);
}

double pathMax(const ConstrainedFunctional& f, const DiscretePath& path, Exec exec) {
  return nodeValues(f, path.nodes, exec).maxCoeff();
}

void reparametrize(const HilbertPair& pair, DiscretePath& path) {
  const int m = path.size();
  std::vector<Vec> logs(m - 1);
  std::vector<double> s(m, 0.0);
  for (int i = 0; i + 1 < m; ++i) {
    logs[i] = logMap(pair, SpherePoint{path.nodes.col(i), path.mu}, path.nodes.col(i + 1));
    s[i + 1] = s[i] + pair.normH(logs[i]);
  }
  if (!(s[m - 1] > 0.0)) return;
  Mat out = path.nodes;
  int j = 0;
  for (int i = 1; i + 1 < m; ++i) {
    double target = s[m - 1] * i / (m - 1);
    while (j < m - 2 && s[j + 1] < target) ++j;
    double len = s[j + 1] - s[j];
    double a = len > 0.0 ? std::clamp((target - s[j]) / len, 0.0, 1.0) : 0.0;
    out.col(i) = pair.renormalize(expMap(pair, SpherePoint{path.nodes.col(j), path.mu}, a * logs[j]), path.mu);
  }
  path.nodes = std::move(out);
}

StringResult stringMethod(const ConstrainedFunctional& f, const HilbertPair& pair, DiscretePath& path,
                          const StringOptions& opts) {
  const int m = path.size();
  StringResult res;
  std::vector<double> perp(m, 0.0);
  for (int it = 0; it < opts.maxIters; ++it) {
    Mat next = path.nodes;
    forRange(1, m - 2, opts.exec, [&](int i) {
      SpherePoint p{path.nodes.col(i), path.mu};
      Vec g = sphereGradient(f, pair, p);
      Vec tau = pair.projectTangentH(p, path.nodes.col(i + 1) - path.nodes.col(i - 1));
      double tn = pair.normE(tau);
      Vec gp = g;
      if (tn > 0.0) {
        tau /= tn;
        gp -= pair.innerE(g, tau) * tau;
      }
      perp[i] = pair.normE(gp);
      Vec sd = -opts.step * gp;
      double sn = pair.normE(sd);
      if (sn > opts.cap) sd *= opts.cap / sn;
      next.col(i) = pair.renormalize(expMap(pair, p, sd), path.mu);
    });
    res.perpResidual = *std::max_element(perp.begin(), perp.end());
    res.iterations = it + 1;
    if (res.perpResidual < opts.tol) {
      res.converged = true;
      break;
    }
    path.nodes = std::move(next);
    reparametrize(pair, path);
  }
  climbTop(f, pair, path, opts);
  evaluatePath(f, path, opts.exec);
  return res;
}

double climbTop(const ConstrainedFunctional& f, const HilbertPair& pair, DiscretePath& path,
                const StringOptions& opts) {
  const int m = path.size();
  Vec vals = nodeValues(f, path.nodes, opts.exec);
  if (m < 3 || opts.climbIters <= 0) return vals.maxCoeff();
  int top = 0;
  vals.segment(1, m - 2).maxCoeff(&top);
  ++top;
  Vec u = path.nodes.col(top);
  Vec dir = path.nodes.col(top + 1) - path.nodes.col(top - 1);
  for (int it = 0; it < opts.climbIters; ++it) {
    SpherePoint p{u, path.mu};
    Vec g = sphereGradient(f, pair, p);
    if (pair.normE(g) < opts.climbTol) {
      path.nodes.col(top) = u;
      return f.value(u);
    }
    Vec tau = pair.projectTangentH(p, dir);
    double tn = pair.normE(tau);
    if (!(tn > 0.0)) break;
    tau /= tn;
    dir = tau;
    Vec sd = -opts.climbStep * (g - 2.0 * pair.innerE(g, tau) * tau);
    double sn = pair.normE(sd);
    if (sn > opts.cap) sd *= opts.cap / sn;
    u = pair.renormalize(expMap(pair, p, sd), path.mu);
  }
  return vals.maxCoeff();
}

LevelEstimate estimateLevel(const ConstrainedFunctional& f, const std::vector<DiscretePath>& pool, bool strict,
                            Exec exec) {
  if (pool.empty()) throw Error(ErrorKind::Config, "empty path pool");
  LevelEstimate est;
  est.c = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < pool.size(); ++k) {
    double mx = pathMax(f, pool[k], exec);
    if (mx < est.c) {
      est.c = mx;
      est.bestIndex = static_cast<int>(k);
    }
  }
  const DiscretePath& best = pool[est.bestIndex];
  est.endpointMax = std::max(f.value(best.w1()), f.value(best.w2()));
  est.geometryOk = est.c > est.endpointMax;
  if (strict && !est.geometryOk) {
    std::ostringstream os;
    os << "level estimate " << est.c << " does not exceed the endpoint values " << est.endpointMax;
    throw Error(ErrorKind::GeometryFailure, os.str());
  }
  return est;
}

std::vector<double> rhoGrid(double rhoMin, double rhoMax, int steps) {
  if (steps < 1 || rhoMax < rhoMin) throw Error(ErrorKind::Config, "invalid rho grid");
  std::vector<double> g(steps);
  for (int i = 0; i < steps; ++i) g[i] = steps == 1 ? rhoMin : rhoMin + (rhoMax - rhoMin) * i / (steps - 1);
  return g;
}

std::vector<SweepRow> rhoSweep(const RhoFamily& family, const HilbertPair& pair, const std::vector<double>& grid,
                               std::vector<DiscretePath>& pool, const StringOptions& opts) {
  if (pool.empty()) throw Error(ErrorKind::Config, "rho sweep needs an initial path");
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error(ErrorKind::Config, "rho grid must be ascending");
  const int k = static_cast<int>(grid.size());
  std::vector<SweepRow> rows(k);
  for (int i = 0; i < k; ++i) {
    PhiRho f = family.at(grid[i]);
    LevelEstimate start = estimateLevel(f, pool, false, opts.exec);
    DiscretePath path = pool[start.bestIndex];
    StringResult sr = stringMethod(f, pair, path, opts);
    rows[i].rho = grid[i];
    rows[i].iterations = sr.iterations;
    rows[i].perpResidual = sr.perpResidual;
    pool.push_back(std::move(path));
  }
  for (int i = 0; i < k; ++i) {
    PhiRho f = family.at(grid[i]);
    LevelEstimate est = estimateLevel(f, pool, false, opts.exec);
    DiscretePath best = pool[est.bestIndex];
    est.c = climbTop(f, pair, best, opts);
    rows[i].c = est.c;
    rows[i].geometryOk = est.geometryOk;
    if (!est.geometryOk)
      logWarning("rho = " + std::to_string(grid[i]) + ": level does not exceed endpoint values (GeometryFailure)");
  }
  for (int i = 0; i < k; ++i) {
    if (i > 0) rows[i].slopeLeft = (rows[i].c - rows[i - 1].c) / (grid[i] - grid[i - 1]);
    if (i + 1 < k) rows[i].slopeRight = (rows[i + 1].c - rows[i].c) / (grid[i + 1] - grid[i]);
    if (rows[i].slopeLeft && rows[i].slopeRight && rows[i].geometryOk) {
      double l = *rows[i].slopeLeft, r = *rows[i].slopeRight;
      rows[i].differentiable = std::abs(l - r) <= 0.1 * std::max(std::abs(l), std::abs(r));
    }
  }
  return rows;
}

double rhoSchedule(double rho, int n) { return rho * (1.0 - std::ldexp(1.0, -n - 2)); }

double epsSchedule(double rho, double slope, int n) { return (2.0 - slope) * (rho - rhoSchedule(rho, n)); }

double alphaOne(double alpha) { return alpha / (2.0 * (alpha + 2.0)); }

TopsSelection boundedTopsSelect(const RhoFamily& family, const HilbertPair& pair, double rho, double cRho,
                                double slope, int count, std::vector<DiscretePath>& pool,
                                const StringOptions& opts) {
  if (pool.empty()) throw Error(ErrorKind::Config, "bounded tops need a path pool");
  TopsSelection sel;
  PhiRho fr = family.at(rho);
  for (int n = 1; n <= count; ++n) {
    double rn = rhoSchedule(rho, n);
    double en = epsSchedule(rho, slope, n);
    PhiRho fn = family.at(rn);
    LevelEstimate start = estimateLevel(fn, pool, false, opts.exec);
    DiscretePath path = pool[start.bestIndex];
    stringMethod(fn, pair, path, opts);
    pool.push_back(path);

    Vec vr = nodeValues(fr, path.nodes, opts.exec);
    double maxRho = vr.maxCoeff();
    if (maxRho > cRho + en) {
      std::ostringstream os;
      os << "n = " << n << ": max Phi_rho on gamma_n = " << maxRho << " exceeds c_rho + eps_n = " << cRho + en;
      throw Error(ErrorKind::SelectionFailure, os.str());
    }
    double b = (path.values.maxCoeff() - (cRho - en)) / (rho - rn);
    double a = cRho + en + rho * b;
    double K = family.normBound(a, path.mu);
    Vec norms = nodeNormsE(pair, path.nodes, opts.exec);
    for (int i = 0; i < path.size(); ++i) {
      if (vr(i) < cRho - en) continue;
      sel.observedMaxNorm = std::max(sel.observedMaxNorm, norms(i));
      if (norms(i) > K) {
        std::ostringstream os;
        os << "n = " << n << ": top node " << i << " has norm " << norms(i) << " above the bound " << K;
        throw Error(ErrorKind::SelectionFailure, os.str());
      }
    }
    sel.K = std::max(sel.K, K);
    sel.paths.push_back(std::move(path));
    sel.rhoN.push_back(rn);
    sel.epsN.push_back(en);
    sel.bN.push_back(b);
    sel.aBound.push_back(a);
    sel.maxPhiRho.push_back(maxRho);
  }
  return sel;
}

std::vector<PSRecord> extractPS(const RhoFamily& family, const HilbertPair& pair, double rho, double cRho,
                                const TopsSelection& tops, const ExtractOptions& opts) {
  PhiRho f = family.at(rho);
  const double a1 = alphaOne(f.alpha());
  std::vector<PSRecord> out;
  for (size_t k = 0; k < tops.paths.size(); ++k) {
    DiscretePath path = opts.positivize ? positivize(f, tops.paths[k]) : tops.paths[k];
    DiscreteMap map = pathMap(path.nodes, path.mu);
    CertifyResult cr = certifyMinimaxPoint(f, pair, map, cRho, tops.epsN[k], a1, tops.K + 1.0, opts.certify);
    PSRecord r;
    r.n = static_cast<int>(k) + 1;
    r.rho = rho;
    r.epsN = tops.epsN[k];
    r.zeta = cr.beta;
    if (cr.found) {
      SpherePoint p{cr.u, path.mu};
      r.u = cr.u;
      r.node = cr.node;
      r.value = cr.value;
      r.dualNorm = cr.dualNorm;
      r.morseCount = cr.morseCount;
      r.lagrange = lagrangeEstimate(f, p);
      r.norm = pair.normE(cr.u);
      r.minNodal = cr.u.minCoeff();
      r.accepted = r.dualNorm <= 3.0 * r.zeta && r.morseCount <= 1 && r.norm <= tops.K;
    } else {
      logWarning("record " + std::to_string(r.n) + ": deformation pushed the path below c - eps");
    }
    out.push_back(std::move(r));
  }
  return out;
}

CriticalPointReport refineAndCertifyLimit(const RhoFamily& family, const HilbertPair& pair, double rho,
                                          const Vec& start, double mu, const RefineOptions& opts) {
  PhiRho f = family.at(rho);
  const int d = static_cast<int>(start.size());
  const Mat& H = pair.gramH();
  Vec u = pair.renormalize(start, mu);
  double lambda = lagrangeEstimate(f, SpherePoint{u, mu});
  auto residual = [&](const Vec& x, double lam) {
    Vec Hx = H * x;
    Vec r(d + 1);
    r.head(d) = f.gradDual(x) - lam * Hx;
    r(d) = 0.5 * (x.dot(Hx) - mu);
    return r;
  };
  auto merit = [&](const Vec& r) { return std::sqrt(pair.dualNorm(r.head(d)) * pair.dualNorm(r.head(d)) + r(d) * r(d)); };

  CriticalPointReport rep;
  rep.rho = rho;
  double el = eulerLagrangeResidual(f, pair, SpherePoint{u, mu});
  int it = 0;
  for (; it < opts.maxIters && el > opts.tol; ++it) {
    Vec r = residual(u, lambda);
    Vec Hu = H * u;
    Mat J = Mat::Zero(d + 1, d + 1);
    J.topLeftCorner(d, d) = f.hessian(u) - lambda * H;
    J.topRightCorner(d, 1) = -Hu;
    J.bottomLeftCorner(1, d) = Hu.transpose();
    Vec step = J.partialPivLu().solve(-r);
    double m0 = merit(r);
    double a = 1.0;
    Vec trial;
    double tl = lambda;
    for (int ls = 0; ls < 30; ++ls, a *= 0.5) {
      trial = pair.renormalize(u + a * step.head(d), mu);
      tl = lagrangeEstimate(f, SpherePoint{trial, mu});
      if (merit(residual(trial, tl)) < m0) break;
    }
    u = trial;
    lambda = tl;
    double next = eulerLagrangeResidual(f, pair, SpherePoint{u, mu});
    if (!(next < el) && a < 1e-8) break;
    el = next;
  }
  SpherePoint p{u, mu};
  rep.u = u;
  rep.iterations = it;
  rep.value = f.value(u);
  rep.lambda = lagrangeEstimate(f, p);
  rep.elResidual = eulerLagrangeResidual(f, pair, p);
  rep.massError = std::abs(pair.innerH(u, u) - mu);
  rep.minNodal = u.minCoeff();
  rep.maxNodal = u.maxCoeff();
  rep.converged = rep.elResidual <= opts.accept;
  if (!rep.converged) {
    std::ostringstream os;
    os << "Newton refinement stalled at Euler-Lagrange residual " << rep.elResidual << " after " << it
       << " iterations";
    throw Error(ErrorKind::NoConvergence, os.str());
  }
  rep.morseIndex = approxMorseIndex(f, pair, p, 0.0).count;
  rep.freeMorseIndex = approxMorseIndex(f, pair, p, 0.0, true).count;
  return rep;
}

Vec positivize(const ConstrainedFunctional& f, const Vec& u) {
  if (!f.modulusInvariant()) throw Error(ErrorKind::NotSymmetric, "functional is not declared modulus-invariant");
  return u.cwiseAbs();
}

DiscretePath positivize(const ConstrainedFunctional& f, const DiscretePath& path) {
  if (!f.modulusInvariant()) throw Error(ErrorKind::NotSymmetric, "functional is not declared modulus-invariant");
  DiscretePath out = path;
  out.nodes = path.nodes.cwiseAbs();
  if (path.values.size() == path.nodes.cols()) evaluatePath(f, out);
  return out;
}

SolveReport runSolve(const NLSProblem& problem, const SolveOptions& opts) {
  const ProblemConfig& cfg = problem.config();
  const HilbertPair& pair = problem.pair();
  const RhoFamily& family = problem.family();
  SolveReport rep;
  rep.rho = cfg.rho;

  auto [w1, w2] = problem.endpoints();
  std::vector<DiscretePath> pool{geodesicPath(pair, w1, w2, cfg.mu, cfg.pathNodes)};
  StringOptions so = opts.string;
  so.maxIters = cfg.pathIters;
  std::vector<double> grid = rhoGrid(cfg.rhoMin, cfg.rhoMax, cfg.rhoSteps);
  rep.sweep = rhoSweep(family, pair, grid, pool, so);

  int at = -1;
  for (size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - cfg.rho) <= 1e-12 * std::max(1.0, std::abs(cfg.rho))) at = static_cast<int>(i);
  if (at < 0) throw Error(ErrorKind::CertificationFailure, "solve rho is not a grid point");
  const SweepRow& row = rep.sweep[at];
  if (!row.differentiable) {
    std::ostringstream os;
    os << "rho = " << cfg.rho << " is not flagged as a differentiability point";
    throw Error(ErrorKind::CertificationFailure, os.str());
  }
  rep.rho = row.rho;
  rep.cRho = row.c;
  rep.slope = 0.5 * (*row.slopeLeft + *row.slopeRight);
  rep.alpha1 = alphaOne(family.at(rep.rho).alpha());

  rep.tops = boundedTopsSelect(family, pair, rep.rho, rep.cRho, rep.slope, cfg.psRecords, pool, so);
  ExtractOptions eo = opts.extract;
  eo.positivize = eo.positivize && family.modulusInvariant();
  eo.certify.seed = cfg.seed;
  eo.certify.exec = so.exec;
  rep.records = extractPS(family, pair, rep.rho, rep.cRho, rep.tops, eo);

  const PSRecord* last = nullptr;
  for (const auto& r : rep.records)
    if (r.accepted) last = &r;
  if (!last) throw Error(ErrorKind::CertificationFailure, "no accepted Palais-Smale record");
  RefineOptions ro = opts.refine;
  ro.tol = cfg.refineTol;
  rep.limit = refineAndCertifyLimit(family, pair, rep.rho, last->u, cfg.mu, ro);
  return rep;
}

}  // namespace mps
