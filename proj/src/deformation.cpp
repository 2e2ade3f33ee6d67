#include "mpsphere/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "mpsphere/errors.hpp"

namespace mps {

namespace {

double paramDist(const Mat& params, int i, const Vec& x) { return (params.col(i) - x).norm(); }

double distToSet(const Mat& params, int i, const std::vector<int>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (int j : set) best = std::min(best, (params.col(i) - params.col(j)).norm());
  return best;
}

// Coordinates of x in the (nearly orthonormal) frame F, by E-projection.
Vec frameCoefficients(const HilbertPair& pair, const Mat& F, const Vec& x) {
  Mat EF = pair.applyE(F);
  Mat gram = F.transpose() * EF;
  return gram.ldlt().solve(EF.transpose() * x);
}

double frameOperatorNorm(const HilbertPair& pair, const Mat& D) {
  Mat A = D.transpose() * pair.applyE(D);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Vec slerp(const Vec& a, const Vec& b, double s) {
  double c = std::clamp(a.dot(b), -1.0, 1.0);
  double theta = std::acos(c);
  Vec r;
  if (theta < 1e-9) {
    r = (1.0 - s) * a + s * b;
  } else if (M_PI - theta < 1e-9) {
    r = s < 0.5 ? a : b;
  } else {
    r = (std::sin((1.0 - s) * theta) * a + std::sin(s * theta) * b) / std::sin(theta);
  }
  return r / r.norm();
}

int latticeMultiplicity(int n) { return n == 1 ? 3 : 9; }

void requireInBall(const HilbertPair& pair, const Vec& u, const Vec& u0, double radius, const char* what) {
  double dist = pair.normE(u - u0);
  if (!(dist < radius)) {
    std::ostringstream os;
    os << what << ": ||u - u0|| = " << dist << " is not below " << radius;
    throw Error(ErrorKind::PreconditionOutOfBall, os.str());
  }
}

}  // namespace

DiscreteMap pathMap(const Mat& nodes, double mu) {
  DiscreteMap m;
  const int k = static_cast<int>(nodes.cols());
  m.nodes = nodes;
  m.mu = mu;
  m.params.resize(1, k);
  for (int i = 0; i < k; ++i) m.params(0, i) = k > 1 ? static_cast<double>(i) / (k - 1) : 0.0;
  m.fixed.assign(k, 0);
  if (k > 0) {
    m.fixed.front() = 1;
    m.fixed.back() = 1;
  }
  return m;
}

int CoverReport::multiplicityBound(int n) { return static_cast<int>(std::ceil(std::pow(2.0 * std::sqrt(n + 1.0) + 2.0, n))); }

namespace {

CoverReport coverFromLattice(int n, double eps, const Vec& origin, const std::vector<std::vector<long>>& idx) {
  CoverReport rep;
  rep.n = n;
  rep.eps = eps;
  rep.innerRadius = eps / 4.0;
  rep.outerRadius = eps / 2.0;
  rep.spacing = eps / (2.0 * std::sqrt(static_cast<double>(n))) * (1.0 - 1e-9);
  rep.centers.resize(n, static_cast<int>(idx.size()));
  for (size_t c = 0; c < idx.size(); ++c)
    for (int k = 0; k < n; ++k) rep.centers(k, c) = origin(k) + rep.spacing * idx[c][k];
  rep.maxMultiplicity = std::min(static_cast<int>(idx.size()), latticeMultiplicity(n));
  rep.N = rep.maxMultiplicity + 1;
  return rep;
}

void checkCoverArgs(int n, double eps) {
  if (n < 1 || n > 2) throw Error(ErrorKind::UnsupportedDimension, "covers are supported for n in {1, 2}");
  if (!(eps > 0.0)) throw Error(ErrorKind::Config, "cover radius must be positive");
}

}  // namespace

CoverReport buildCover(const Mat& points, double eps) {
  const int n = static_cast<int>(points.rows());
  checkCoverArgs(n, eps);
  if (points.cols() == 0) return coverFromLattice(n, eps, Vec::Zero(n), {});
  double s = eps / (2.0 * std::sqrt(static_cast<double>(n))) * (1.0 - 1e-9);
  Vec origin = points.rowwise().minCoeff();
  double r = eps / 4.0;
  long reach = static_cast<long>(std::ceil(r / s)) + 1;
  std::map<std::vector<long>, char> marked;
  for (int j = 0; j < points.cols(); ++j) {
    std::vector<long> base(n);
    for (int k = 0; k < n; ++k) base[k] = static_cast<long>(std::floor((points(k, j) - origin(k)) / s));
    std::vector<long> off(n, -reach);
    while (true) {
      std::vector<long> id(n);
      double d2 = 0.0;
      for (int k = 0; k < n; ++k) {
        id[k] = base[k] + off[k];
        double x = origin(k) + s * id[k] - points(k, j);
        d2 += x * x;
      }
      if (std::sqrt(d2) < r) marked[id] = 1;
      int k = 0;
      while (k < n && ++off[k] > reach + 1) off[k++] = -reach;
      if (k == n) break;
    }
  }
  std::vector<std::vector<long>> idx;
  for (const auto& kv : marked) idx.push_back(kv.first);
  return coverFromLattice(n, eps, origin, idx);
}

CoverReport buildCoverBox(const Vec& lo, const Vec& hi, double eps) {
  const int n = static_cast<int>(lo.size());
  checkCoverArgs(n, eps);
  double s = eps / (2.0 * std::sqrt(static_cast<double>(n))) * (1.0 - 1e-9);
  double r = eps / 4.0;
  std::vector<long> count(n);
  for (int k = 0; k < n; ++k) count[k] = static_cast<long>(std::ceil((hi(k) - lo(k)) / s)) + 1;
  std::vector<std::vector<long>> idx;
  std::vector<long> id(n, -1);
  while (true) {
    double d2 = 0.0;
    for (int k = 0; k < n; ++k) {
      double x = lo(k) + s * id[k];
      double gap = std::max({lo(k) - x, x - hi(k), 0.0});
      d2 += gap * gap;
    }
    if (std::sqrt(d2) < r) idx.push_back(id);
    int k = 0;
    while (k < n && ++id[k] > count[k]) id[k++] = -1;
    if (k == n) break;
  }
  std::sort(idx.begin(), idx.end());
  return coverFromLattice(n, eps, lo, idx);
}

std::optional<Vec> descentDirection(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p,
                                    const Mat& frame) {
  Vec g = sphereGradient(f, pair, p);
  Vec c = frameCoefficients(pair, frame, g);
  Vec Pg = frame * c;
  double n = pair.normE(Pg);
  if (n <= 1e-12) return std::nullopt;
  return Vec(-Pg / n);
}

double geodesicDecrease(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p, const Vec& w,
                        double t) {
  if (t == 0.0) return 0.0;
  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  Geodesic g(pair, p.u, w, p.mu);
  const int panels = 4;
  double h = t / panels;
  double integral = 0.0;
  for (int k = 0; k < panels; ++k) {
    double a = k * h;
    for (int q = 0; q < 5; ++q) {
      double s = a + 0.5 * h * (gx[q] + 1.0);
      integral += 0.5 * h * gw[q] * f.gradDual(g.point(s)).dot(g.velocity(s));
    }
  }
  return -integral;
}

namespace {

DescentCertificate certify(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& p,
                           const Vec& w, double beta, double t, double bound) {
  DescentCertificate c;
  c.u = p.u;
  c.direction = w;
  c.beta = beta;
  c.t = t;
  c.bound = bound;
  c.decrease = geodesicDecrease(f, pair, p, w, t);
  c.directDecrease = f.value(p.u) - f.value(expMap(pair, p, t * w));
  c.violation = std::max(0.0, bound - c.decrease);
  c.valid = c.decrease > bound || c.violation <= kCertificateSlack;
  return c;
}

void requireStep(double t, double lo, double tmax) {
  if (!(t > 0.0 && t >= lo && t < tmax)) {
    std::ostringstream os;
    os << "step t = " << t << " outside [" << lo << ", " << tmax << ")";
    throw Error(ErrorKind::HypothesisViolated, os.str());
  }
}

}  // namespace

DescentCertificate descentStep(const ConstrainedFunctional& f, const HilbertPair& pair, const GeometryConstants& gc,
                               const SpherePoint& u0, const Mat& basis, const Vec& u, double beta, double t,
                               const std::optional<Vec>& direction) {
  double d3 = gc.delta3(beta);
  requireInBall(pair, u, u0.u, 0.5 * d3, "descentStep");
  requireStep(t, 0.0, gc.tmax(d3));
  SpherePoint p{u, u0.mu};
  Mat F = transportFrame(pair, u0, basis, u);
  Vec w;
  bool zero = false;
  if (direction) {
    w = *direction / pair.normE(*direction);
    zero = true;
  } else if (auto dir = descentDirection(f, pair, p, F)) {
    w = *dir;
  } else {
    w = F.col(0) / pair.normE(F.col(0));
    zero = true;
  }
  DescentCertificate c = certify(f, pair, p, w, beta, t, beta * t * t / 12.0);
  c.zeroCase = zero;
  return c;
}

NeighborhoodCheck neighborhoodAssertions(const ConstrainedFunctional& f, const HilbertPair& pair,
                                         const GeometryConstants& gc, const SpherePoint& u0, const Mat& basis,
                                         const Vec& u, const Vec& z, double beta, double t0) {
  NeighborhoodCheck chk;
  chk.gradGap = pair.dualNorm(f.gradDual(u) - f.gradDual(z));
  chk.gradLimit = beta * t0 / 48.0;
  Mat Fu = transportFrame(pair, u0, basis, u);
  Mat Fz = transportFrame(pair, u0, basis, z);
  chk.frameGap = frameOperatorNorm(pair, Fu - Fz);
  chk.frameLimit = beta * t0 / (48.0 * gc.K);
  return chk;
}

DescentCertificate neighborhoodStep(const ConstrainedFunctional& f, const HilbertPair& pair,
                                    const GeometryConstants& gc, const SpherePoint& u0, const Mat& basis,
                                    const Vec& u, const Vec& z, const Vec& w, double beta, double t, double t0) {
  double d3 = gc.delta3(beta);
  requireInBall(pair, z, u0.u, 0.5 * d3, "neighborhoodStep");
  requireStep(t, t0, gc.tmax(d3));
  NeighborhoodCheck chk = neighborhoodAssertions(f, pair, gc, u0, basis, u, z, beta, t0);
  if (!chk.holds()) {
    std::ostringstream os;
    os << "neighborhood assertions fail: gradient gap " << chk.gradGap << " (limit " << chk.gradLimit
       << "), frame gap " << chk.frameGap << " (limit " << chk.frameLimit << ")";
    throw Error(ErrorKind::HypothesisViolated, os.str());
  }
  DescentCertificate c = certify(f, pair, SpherePoint{z, u0.mu}, w / pair.normE(w), beta, t, beta * t * t / 24.0);
  c.zeroCase = true;
  c.neighborhood = true;
  return c;
}

HomotopyResult homotopyDeform(const ConstrainedFunctional& f, const HilbertPair& pair, const GeometryConstants& gc,
                              const DiscreteMap& map, const std::vector<int>& K1, const SpherePoint& u0,
                              const Mat& basis, double beta, double nu, double t0, double t, Exec exec) {
  const int m = map.size();
  const double d3 = gc.delta3(beta);
  const double tmax = gc.tmax(d3);
  if (!(t >= 0.0 && t <= tmax)) throw Error(ErrorKind::HypothesisViolated, "homotopy time outside [0, tmax]");
  if (!(t0 > 0.0 && t0 < tmax)) throw Error(ErrorKind::HypothesisViolated, "t0 outside (0, tmax)");
  for (int i : K1) {
    if (map.fixed[i]) throw Error(ErrorKind::HypothesisViolated, "K1 meets the fixed boundary set");
    requireInBall(pair, map.nodes.col(i), u0.u, 0.5 * d3, "homotopyDeform");
  }

  HomotopyResult res;
  res.eta = map;
  res.t = t;
  res.decrease.assign(m, 0.0);
  if (K1.empty() || t == 0.0) {
    res.nu = nu;
    return res;
  }

  std::vector<double> dist(m);
  for (int i = 0; i < m; ++i) dist[i] = distToSet(map.params, i, K1);
  double nuEff = nu;
  for (int it = 0; it < 200; ++it) {
    bool inside = true;
    for (int i = 0; i < m && inside; ++i)
      if (dist[i] < nuEff && !(pair.normE(map.nodes.col(i) - u0.u) < 0.5 * d3)) inside = false;
    if (inside) break;
    nuEff *= 0.5;
  }
  res.nu = nuEff;

  std::vector<int> active;
  for (int i = 0; i < m; ++i)
    if (dist[i] < nuEff && !map.fixed[i]) active.push_back(i);
  const int na = static_cast<int>(active.size());
  const int k = static_cast<int>(basis.cols());

  std::vector<Mat> frames(na);
  std::vector<Vec> coef(na);
  std::vector<char> zero(na, 0);
  auto body = [&](int a) {
    int i = active[a];
    SpherePoint p{map.nodes.col(i), map.mu};
    frames[a] = transportFrame(pair, u0, basis, p.u);
    auto dir = descentDirection(f, pair, p, frames[a]);
    if (dir) {
      Vec c = frameCoefficients(pair, frames[a], *dir);
      coef[a] = c / c.norm();
    } else {
      zero[a] = 1;
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int a = 0; a < na; ++a) body(a);
  } else {
    for (int a = 0; a < na; ++a) body(a);
  }

  // Continuous unit extension of the coefficient field over zero-direction nodes.
  std::vector<int> good;
  for (int a = 0; a < na; ++a)
    if (!zero[a]) good.push_back(a);
  for (int a = 0; a < na; ++a) {
    if (!zero[a]) continue;
    if (good.empty()) {
      coef[a] = Vec::Unit(k, 0);
      continue;
    }
    if (map.n() == 1) {
      double x = map.params(0, active[a]);
      int left = -1, right = -1;
      for (int g : good) {
        double xg = map.params(0, active[g]);
        if (xg <= x && (left < 0 || xg > map.params(0, active[left]))) left = g;
        if (xg >= x && (right < 0 || xg < map.params(0, active[right]))) right = g;
      }
      if (left >= 0 && right >= 0 && left != right) {
        double xl = map.params(0, active[left]), xr = map.params(0, active[right]);
        coef[a] = slerp(coef[left], coef[right], (x - xl) / (xr - xl));
      } else {
        coef[a] = coef[left >= 0 ? left : right];
      }
    } else {
      int best = good.front();
      for (int g : good)
        if (paramDist(map.params, active[g], map.params.col(active[a])) <
            paramDist(map.params, active[best], map.params.col(active[a])))
          best = g;
      coef[a] = coef[best];
    }
  }

  std::vector<double> disp(na, 0.0);
  std::vector<char> inK1(m, 0);
  for (int i : K1) inK1[i] = 1;
  auto move = [&](int a) {
    int i = active[a];
    SpherePoint p{map.nodes.col(i), map.mu};
    Vec w = frames[a] * coef[a];
    w /= pair.normE(w);
    if (zero[a]) {
      Vec g = sphereGradient(f, pair, p);
      if (pair.innerE(g, w) > 0.0) w = -w;
    }
    double gx = std::clamp(1.0 - dist[i] / nuEff, 0.0, 1.0);
    double step = t * gx;
    if (step == 0.0) return;
    Vec next = pair.renormalize(expMap(pair, p, step * w), map.mu);
    res.eta.nodes.col(i) = next;
    res.decrease[i] = geodesicDecrease(f, pair, p, w, step);
    disp[a] = pair.normE(next - p.u);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int a = 0; a < na; ++a) move(a);
  } else {
    for (int a = 0; a < na; ++a) move(a);
  }

  std::vector<char> isActive(m, 0);
  for (int a = 0; a < na; ++a) {
    isActive[active[a]] = 1;
    if (disp[a] > 0.0) res.moved.push_back(active[a]);
    res.maxDisplacement = std::max(res.maxDisplacement, disp[a]);
    if (disp[a] > 3.0 * t) res.displacementOk = false;
  }
  for (int i = 0; i < m; ++i) {
    if (!isActive[i] && (res.eta.nodes.col(i) - map.nodes.col(i)).cwiseAbs().maxCoeff() != 0.0)
      res.fixedOutside = false;
    if (res.decrease[i] < -kCertificateSlack) res.nonIncreasing = false;
    if (inK1[i] && t >= t0 && !(res.decrease[i] > beta * t * t / 24.0 - kCertificateSlack))
      res.decreaseOnK1 = false;
  }
  return res;
}

IterateResult iterateDeform(const ConstrainedFunctional& f, const HilbertPair& pair, const GeometryConstants& gc,
                            const DiscreteMap& map, const std::vector<int>& K2, double beta, double delta, double nu,
                            Exec exec) {
  IterateResult res;
  res.map = map;
  if (K2.empty()) return res;
  const int m = map.size();
  const int n = map.n();
  const double d3 = gc.delta3(beta);
  if (!(delta > 0.0 && delta <= d3)) throw Error(ErrorKind::HypothesisViolated, "delta must lie in (0, delta3]");

  for (int y : K2) {
    if (!(pair.normE(map.nodes.col(y)) < gc.R - 1.0))
      throw Error(ErrorKind::PreconditionOutOfBall, "f(K2) is not inside B(0, R-1)");
    if (map.fixed[y]) throw Error(ErrorKind::HypothesisViolated, "K2 meets the fixed boundary set");
  }

  // Negative frames of dimension n+1 at every node of K2.
  std::vector<Mat> frames(K2.size());
  std::vector<int> counts(K2.size());
  auto frameAt = [&](int a) {
    MorseReport rep = approxMorseIndex(f, pair, SpherePoint{map.nodes.col(K2[a]), map.mu}, beta);
    counts[a] = rep.count;
    if (rep.count >= n + 1) frames[a] = rep.basis.leftCols(n + 1);
  };
  const int nk = static_cast<int>(K2.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int a = 0; a < nk; ++a) frameAt(a);
  } else {
    for (int a = 0; a < nk; ++a) frameAt(a);
  }
  for (int a = 0; a < nk; ++a)
    if (counts[a] < n + 1) {
      std::ostringstream os;
      os << "node " << K2[a] << " has only " << counts[a] << " directions below -beta; need " << n + 1;
      throw Error(ErrorKind::FrameDimensionTooSmall, os.str());
    }

  Mat k2params(n, nk);
  for (int a = 0; a < nk; ++a) k2params.col(a) = map.params.col(K2[a]);
  const int Nmax = latticeMultiplicity(n) + 1;
  double extent = (k2params.rowwise().maxCoeff() - k2params.rowwise().minCoeff()).norm();
  double eps = std::min(4.0 * nu / 3.0 * (1.0 - 1e-9), std::max(extent, 1e-3));
  bool okCover = false;
  for (int it = 0; it < 80 && !okCover; ++it, eps *= 0.5) {
    if (!(0.75 * eps < nu)) continue;
    res.cover = buildCover(k2params, eps);
    res.anchors.clear();
    okCover = true;
    for (int c = 0; c < res.cover.centers.cols() && okCover; ++c) {
      Vec xc = res.cover.centers.col(c);
      int anchor = K2[0];
      for (int y : K2)
        if (paramDist(map.params, y, xc) < paramDist(map.params, anchor, xc)) anchor = y;
      res.anchors.push_back(anchor);
      for (int i = 0; i < m; ++i)
        if (paramDist(map.params, i, xc) <= 0.5 * eps &&
            !(pair.normE(map.nodes.col(i) - map.nodes.col(anchor)) < delta / (8.0 * Nmax))) {
          okCover = false;
          break;
        }
    }
    if (okCover) break;
  }
  if (!okCover) throw Error(ErrorKind::CoverFailure, "no cover radius meets the continuity requirement");

  const int N = res.cover.N;
  const double tmax = gc.tmax(d3);
  res.tau = res.cover.eps / 4.0;
  res.stepT = delta / (6.0 * N);
  res.requiredDecrease = beta * delta * delta / (864.0 * N * N);
  if (!(res.stepT < tmax)) throw Error(ErrorKind::HypothesisViolated, "stage step exceeds tmax");
  double t0 = std::min(tmax / 8.0, res.stepT);

  std::map<int, int> k2index;
  for (int a = 0; a < nk; ++a) k2index[K2[a]] = a;
  std::vector<double> cumulative(m, 0.0);
  DiscreteMap current = map;
  for (int c = 0; c < res.cover.centers.cols(); ++c) {
    Vec xc = res.cover.centers.col(c);
    std::vector<int> K1;
    for (int i = 0; i < m; ++i)
      if (paramDist(map.params, i, xc) <= res.cover.innerRadius && !map.fixed[i]) K1.push_back(i);
    if (K1.empty()) continue;
    int anchor = res.anchors[c];
    SpherePoint u0{map.nodes.col(anchor), map.mu};
    Vec before = nodeValues(f, current.nodes, exec);
    HomotopyResult h = homotopyDeform(f, pair, gc, current, K1, u0, frames[k2index[anchor]], beta, res.tau, t0,
                                      res.stepT, exec);
    Vec after = nodeValues(f, h.eta.nodes, exec);
    ++res.stages;
    for (int i = 0; i < m; ++i) {
      double disp = pair.normE(h.eta.nodes.col(i) - current.nodes.col(i));
      cumulative[i] += h.decrease[i];
      res.maxStageDisplacement = std::max(res.maxStageDisplacement, disp);
      bool inside = paramDist(map.params, i, xc) < 0.5 * res.cover.eps;
      if ((!inside && disp != 0.0) || disp > delta / (2.0 * N)) res.stageDisplacementOk = false;
      if (disp > 0.0) res.trace.push_back({res.stages, i, before(i), after(i), disp});
    }
    res.nonIncreasing = res.nonIncreasing && h.nonIncreasing;
    current = std::move(h.eta);
  }
  res.map = current;

  std::vector<char> inK2(m, 0);
  for (int y : K2) inK2[y] = 1;
  res.minDecreaseOnK2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    double disp = pair.normE(current.nodes.col(i) - map.nodes.col(i));
    res.maxDisplacement = std::max(res.maxDisplacement, disp);
    if (disp > 0.5 * delta) res.displacementOk = false;
    if (cumulative[i] < -kCertificateSlack) res.nonIncreasing = false;
    if (distToSet(map.params, i, K2) >= nu && disp != 0.0) res.fixedOutside = false;
    if (inK2[i]) {
      res.minDecreaseOnK2 = std::min(res.minDecreaseOnK2, cumulative[i]);
      if (!(cumulative[i] > res.requiredDecrease - kCertificateSlack)) res.decreaseOnK2 = false;
    }
  }
  return res;
}

FirstOrderResult firstOrderDeform(const ConstrainedFunctional& f, const HilbertPair& pair, const DiscreteMap& map,
                                  const std::vector<int>& K3, double cTil, double epsTil, double muTil,
                                  const FirstOrderOptions& opts, Exec exec) {
  FirstOrderResult res;
  res.map = map;
  if (K3.empty()) return res;
  const int nk = static_cast<int>(K3.size());
  const double target = cTil - epsTil;
  const double budget = 2.0 * muTil;
  const double required = 8.0 * epsTil / muTil;

  std::vector<double> minNorm(nk, std::numeric_limits<double>::infinity());
  std::vector<char> reached(nk, 1);
  std::vector<double> before(nk), after(nk), disp(nk, 0.0);
  std::vector<Vec> out(nk);
  auto body = [&](int a) {
    int i = K3[a];
    SpherePoint p{map.nodes.col(i), map.mu};
    std::mt19937_64 rng(opts.seed * 1000003ULL + static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal;
    minNorm[a] = constrainedDualNorm(f, pair, p);
    for (int s = 0; s < opts.hypothesisSamples; ++s) {
      Vec x(p.u.size());
      for (int k = 0; k < x.size(); ++k) x(k) = normal(rng);
      Vec v = pair.projectTangentH(p, x);
      double r = budget * std::uniform_real_distribution<double>(0.0, 0.999)(rng);
      v *= r / pair.normE(v);
      Vec z = expMap(pair, p, v);
      for (int shrink = 0; shrink < 60 && !(pair.normE(z - p.u) < budget); ++shrink) {
        v *= 0.5;
        z = expMap(pair, p, v);
      }
      minNorm[a] = std::min(minNorm[a], constrainedDualNorm(f, pair, SpherePoint{z, map.mu}));
    }

    Vec u = p.u;
    double phi = f.value(u);
    before[a] = phi;
    double travel = 0.0;
    int steps = 0;
    while (!map.fixed[i] && phi >= target && steps++ < opts.maxSteps) {
      SpherePoint q{u, map.mu};
      Vec g = sphereGradient(f, pair, q);
      double gn = pair.normE(g);
      if (gn == 0.0) break;
      double remaining = budget - travel;
      double s = std::min(remaining, 1.5 * (phi - target) / gn + 1e-3 * remaining);
      bool accepted = false;
      while (s > 1e-300) {
        Vec next = pair.renormalize(expMap(pair, q, -(s / gn) * g), map.mu);
        double hop = pair.normE(next - u);
        double val = f.value(next);
        if (travel + hop <= budget && val <= phi - opts.armijo * s * gn) {
          travel += hop;
          u = next;
          phi = val;
          accepted = true;
          break;
        }
        s *= 0.5;
      }
      if (!accepted) break;
    }
    out[a] = u;
    after[a] = phi;
    disp[a] = pair.normE(u - p.u);
    reached[a] = phi < target;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int a = 0; a < nk; ++a) body(a);
  } else {
    for (int a = 0; a < nk; ++a) body(a);
  }

  res.minSampledDualNorm = *std::min_element(minNorm.begin(), minNorm.end());
  res.hypothesisHolds = res.minSampledDualNorm >= required;
  int failed = -1;
  for (int a = 0; a < nk; ++a) {
    int i = K3[a];
    if (before[a] <= cTil - 2.0 * epsTil && disp[a] != 0.0) res.unchangedLow = false;
    if (after[a] > before[a]) res.nonIncreasing = false;
    res.map.nodes.col(i) = out[a];
    if (disp[a] > 0.0) res.trace.push_back({0, i, before[a], after[a], disp[a]});
    if (!reached[a] && failed < 0) failed = i;
  }
  if (failed >= 0) {
    res.reachedTarget = false;
    std::ostringstream os;
    os << "node " << failed << " stays above c - eps after travel budget " << budget
       << " (sampled dual norm " << res.minSampledDualNorm << ", required " << required << ")";
    throw Error(ErrorKind::SlowDecrease, os.str());
  }
  return res;
}

CertifyResult certifyMinimaxPoint(const ConstrainedFunctional& f, const HilbertPair& pair, const DiscreteMap& map,
                                  double c, double eps, double alpha1, double R, const CertifyOptions& opts) {
  const double alpha = f.alpha();
  if (!(alpha1 > 0.0 && alpha1 <= alpha / (2.0 * (alpha + 2.0)) + 1e-15))
    throw Error(ErrorKind::HypothesisViolated, "alpha1 must lie in (0, alpha / (2 (alpha + 2))]");
  if (!(eps > 0.0)) throw Error(ErrorKind::Config, "eps must be positive");
  const int m = map.size();
  const int n = map.n();
  Vec vals = nodeValues(f, map.nodes, opts.exec);
  double slack = 1e-12 * std::max(1.0, std::abs(c));
  if (vals.maxCoeff() > c + eps + slack) {
    std::ostringstream os;
    os << "max phi on A = " << vals.maxCoeff() << " exceeds c + eps = " << c + eps;
    throw Error(ErrorKind::HypothesisViolated, os.str());
  }
  CertifyResult res;
  res.beta = std::pow(eps, alpha1);
  std::vector<int> K;
  for (int i = 0; i < m; ++i)
    if (vals(i) >= c - eps) K.push_back(i);
  res.kSize = static_cast<int>(K.size());
  if (K.empty()) {
    res.witness = map;
    res.witnessMax = vals.maxCoeff();
    return res;
  }
  for (int i : K)
    if (!(pair.normE(map.nodes.col(i)) < R - 1.0)) {
      std::ostringstream os;
      os << "node " << i << " of K has norm " << pair.normE(map.nodes.col(i)) << " >= R - 1 = " << R - 1.0;
      throw Error(ErrorKind::HypothesisViolated, os.str());
    }

  const int nk = static_cast<int>(K.size());
  Mat kn(map.nodes.rows(), nk);
  for (int a = 0; a < nk; ++a) kn.col(a) = map.nodes.col(K[a]);
  Vec duals = nodeDualNorms(f, pair, kn, map.mu, opts.exec);
  std::vector<int> small;
  for (int a = 0; a < nk; ++a)
    if (duals(a) <= 3.0 * res.beta) small.push_back(a);
  std::vector<int> counts = nodeMorseCounts(f, pair, kn, map.mu, res.beta, small, opts.exec);
  int best = -1;
  for (size_t s = 0; s < small.size(); ++s)
    if (counts[s] <= n) {
      double gap = std::abs(vals(K[small[s]]) - c);
      if (best < 0 || gap < std::abs(vals(K[small[best]]) - c) ||
          (gap == std::abs(vals(K[small[best]]) - c) && duals(small[s]) < duals(small[best])))
        best = static_cast<int>(s);
    }
  if (best >= 0) {
    int a = small[best];
    res.found = true;
    res.node = K[a];
    res.u = map.nodes.col(K[a]);
    res.value = vals(K[a]);
    res.dualNorm = duals(a);
    res.morseCount = counts[best];
    return res;
  }

  if (!(res.beta < 1.0)) throw Error(ErrorKind::HypothesisViolated, "eps^alpha1 must be below 1 to deform");
  GeometryConstants gc;
  gc.R = R;
  gc.mu = map.mu;
  gc.K = f.boundK(R, map.mu);
  gc.M = std::max(1.0, f.holderM(R));
  gc.alpha = alpha;
  gc.n = n;
  res.delta = 0.5 * std::min(res.beta / gc.M, gc.delta3(res.beta));

  DiscreteMap current = map;
  for (int round = 0; round < opts.maxRounds; ++round) {
    Vec cv = nodeValues(f, current.nodes, opts.exec);
    Vec cd = nodeDualNorms(f, pair, current.nodes, map.mu, opts.exec);
    std::vector<int> T1, T2, Kr, D0;
    for (int i = 0; i < m; ++i) {
      if (current.fixed[i]) D0.push_back(i);
      if (cv(i) < c - eps) continue;
      Kr.push_back(i);
      (cd(i) > 3.0 * res.beta ? T1 : T2).push_back(i);
    }
    if (Kr.empty()) {
      res.witness = current;
      res.witnessMax = cv.maxCoeff();
      return res;
    }
    double nu = 1.0;
    if (!D0.empty()) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int i : Kr) dmin = std::min(dmin, distToSet(current.params, i, D0));
      nu = 0.5 * dmin;
    }
    IterateResult g = iterateDeform(f, pair, gc, current, T2, res.beta, res.delta, nu, opts.exec);
    res.trace.insert(res.trace.end(), g.trace.begin(), g.trace.end());
    FirstOrderOptions fo;
    fo.seed = opts.seed + static_cast<std::uint64_t>(round);
    FirstOrderResult h = firstOrderDeform(f, pair, g.map, T1, c, eps, 0.5 * res.delta, fo, opts.exec);
    for (auto t : h.trace) {
      t.stage = g.stages + 1;
      res.trace.push_back(t);
    }
    current = std::move(h.map);
    Vec after = nodeValues(f, current.nodes, opts.exec);
    if (after.maxCoeff() < c - eps) {
      res.witness = current;
      res.witnessMax = after.maxCoeff();
      return res;
    }
  }
  throw Error(ErrorKind::BudgetExceeded, "deformation rounds exhausted without reaching c - eps");
}

}  // namespace mps
