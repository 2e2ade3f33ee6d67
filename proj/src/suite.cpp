#include "mpsphere/suite.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>

#include "mpsphere/deformation.hpp"
#include "mpsphere/functional.hpp"
#include "mpsphere/problems.hpp"
#include "mpsphere/sphere_geometry.hpp"

namespace mps {

namespace {

double uniform(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

struct Tracker {
  SuiteCheck c;
  Tracker(std::string group, std::string name, double limit) {
    c.group = std::move(group);
    c.name = std::move(name);
    c.limit = limit;
  }
  void add(double x) {
    ++c.samples;
    if (!(x <= c.limit)) ++c.violations;
    if (std::isnan(x)) x = std::numeric_limits<double>::infinity();
    c.measured = std::max(c.measured, x);
  }
  // Boolean property: measured is the number of failures.
  void flag(bool ok) {
    ++c.samples;
    if (!ok) {
      ++c.violations;
      c.measured += 1.0;
    }
  }
};

Vec randomTangent(const HilbertPair& pair, const SpherePoint& p, std::mt19937_64& rng) {
  return pair.projectTangentH(p, randomVector(p.u.size(), rng));
}

Vec smoothVector(int d, std::mt19937_64& rng, double base) {
  Vec u = Vec::Constant(d, base);
  for (int k = 1; k <= 4; ++k) {
    double a = uniform(rng, -0.4, 0.4) / k, ph = uniform(rng, 0.0, 2.0 * M_PI);
    for (int i = 0; i < d; ++i) u(i) += a * std::cos(k * M_PI * i / (d - 1) + ph);
  }
  return u;
}

// Largest |eigenvalue| of the symmetric form D relative to gramE.
double formNormE(const HilbertPair& pair, const Mat& D) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (D + D.transpose()), pair.gramE(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Vec randomVector(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec x(d);
  for (int i = 0; i < d; ++i) x(i) = normal(rng);
  return x;
}

HilbertPair randomPair(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const int k = std::min(8, d);
  Mat B(d, k), C(d, k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) {
      B(i, j) = normal(rng);
      C(i, j) = normal(rng);
    }
  Mat H = Mat::Identity(d, d) + B * B.transpose() / d;
  double s = uniform(rng, 0.1, 2.0);
  Mat T = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    T(i, i) = 2.0;
    if (i + 1 < d) T(i, i + 1) = T(i + 1, i) = -1.0;
  }
  Mat E = H + s * T + C * C.transpose() / d;
  return HilbertPair(0.5 * (E + E.transpose()), 0.5 * (H + H.transpose()));
}

std::vector<SuiteCheck> geometrySuite(const HilbertPair& pair, int samples, std::uint64_t seed) {
  const int d = pair.dim();
  const std::string g = "geometry";
  Tracker sphere(g, "sphere_preservation_rel_mu", 1e-10);
  Tracker speed(g, "h_speed_conservation", 1e-10);
  Tracker curve(g, "geodesic_equation_residual", 1e-9);
  Tracker logNorm(g, "log_norm_identity", 1e-10);
  Tracker roundTrip(g, "exp_log_round_trip", 1e-9);
  Tracker isometry(g, "transport_isometry_drift", 1e-6);
  Tracker tangency(g, "transport_tangency", 1e-6);
  Tracker inverse(g, "transport_inverse", 1e-6);
  Tracker diffTransport(g, "diff_transport_bound_violations", 0.0);
  Tracker tmaxBall(g, "tmax_containment_violations", 0.0);
  Tracker drift(g, "velocity_drift_violations", 0.0);
  Tracker holonomy(g, "holonomy_defect_bound_violations", 0.0);

  for (int s = 0; s < samples; ++s) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(s) * 7919ULL + d);
    double mu = uniform(rng, 0.5, 2.0);
    SpherePoint p{pair.renormalize(randomVector(d, rng), mu), mu};
    Vec v = randomTangent(pair, p, rng);
    double theta = uniform(rng, 0.05, 2.5);
    v *= theta * std::sqrt(mu) / pair.normH(v);
    double vH = pair.normH(v);

    Geodesic geo(pair, p.u, v, mu);
    for (double t : {0.25, 0.5, 1.0}) {
      Vec x = geo.point(t);
      sphere.add(std::abs(pair.innerH(x, x) - mu) / mu);
      speed.add(std::abs(pair.normH(geo.velocity(t)) - vH) / vH);
      curve.add(pair.normE(geo.equationResidual(t)) / std::max(1.0, pair.normE(x)));
    }

    Vec u1 = expMap(pair, p, v);
    Vec lg = logMap(pair, p, u1);
    double c = std::clamp(pair.innerH(u1, p.u) / mu, -1.0, 1.0);
    logNorm.add(std::abs(pair.normH(lg) - std::sqrt(mu) * std::acos(c)) / std::sqrt(mu));
    roundTrip.add(pair.normE(expMap(pair, p, lg) - u1) / pair.normE(u1));

    Mat W(d, 3);
    for (int j = 0; j < 3; ++j) W.col(j) = randomTangent(pair, p, rng);
    Mat TW = transportAlongGeodesic(pair, p, v, W);
    Mat G0 = W.transpose() * pair.gramE() * W, G1 = TW.transpose() * pair.gramE() * TW;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        isometry.add(std::abs(G1(i, j) - G0(i, j)) / std::sqrt(G0(i, i) * G0(j, j)));
    for (int j = 0; j < 3; ++j)
      tangency.add(std::abs(pair.innerH(u1, TW.col(j))) / (std::sqrt(mu) * pair.normH(TW.col(j))));
    RadialTransport rt(pair, p, u1);
    Mat back = rt.applyInverse(rt.apply(W));
    for (int j = 0; j < 3; ++j) inverse.add(pair.normE(back.col(j) - W.col(j)) / pair.normE(W.col(j)));

    // Transport displacement bound near u0 inside B(0, R-1).
    double R = pair.normE(p.u) + 1.0 + 1e-9;
    GeometryConstants gc;
    gc.R = R;
    gc.mu = mu;
    double d0 = gc.delta0();
    Vec v2 = randomTangent(pair, p, rng);
    v2 *= uniform(rng, 0.05, 0.9) * d0 / pair.normE(v2);
    Vec u2 = expMap(pair, p, v2);
    for (int it = 0; it < 60 && !(pair.normE(u2 - p.u) < d0); ++it) {
      v2 *= 0.5;
      u2 = expMap(pair, p, v2);
    }
    Vec w0 = randomTangent(pair, p, rng);
    RadialTransport rt2(pair, p, u2);
    Vec Tw = rt2.apply(w0);
    diffTransport.flag(pair.normE(Tw - w0) <= gc.C() * pair.normH(rt2.logVector()) * pair.normE(w0) * (1 + 1e-9));

    // tmax containment.
    gc.R = pair.normE(p.u) * uniform(rng, 1.0, 3.0) + 1e-12;
    double delta = uniform(rng, 0.01, 1.0);
    Vec v3 = randomTangent(pair, p, rng);
    v3 *= uniform(rng, 0.0, 0.45) * delta / pair.normE(v3);
    Vec u3 = expMap(pair, p, v3);
    for (int it = 0; it < 60 && !(pair.normE(u3 - p.u) < 0.5 * delta); ++it) {
      v3 *= 0.5;
      u3 = expMap(pair, p, v3);
    }
    SpherePoint q{u3, mu};
    Vec w = randomTangent(pair, q, rng);
    w *= uniform(rng, 0.1, 1.0) / pair.normE(w);
    double tmax = gc.tmax(delta);
    double t = uniform(rng, 0.0, 1.0) * tmax;
    Geodesic g3(pair, u3, w, mu);
    tmaxBall.flag(pair.normE(g3.point(t) - p.u) < delta);
    // Velocity drift ||sigma'(tau) - sigma'(0)|| <= R tmax / mu with R bounding the curve.
    double Rc = std::max(gc.R, pair.normE(u3) + 1e-12);
    drift.flag(pair.normE(g3.velocity(t) - w) <= Rc * tmax / mu * (1 + 1e-9) + 1e-15);

    // Holonomy defect against the analytic chain bound.
    if (s % 5 == 0) {
      gc.R = pair.normE(p.u) + 1.0 + 1e-9;
      gc.K = 1.0;
      gc.n = 1;
      Mat basis = tangentBasis(pair, p).leftCols(2);
      double r = uniform(rng, 0.01, 0.2) * d0;
      Vec v4 = randomTangent(pair, p, rng);
      v4 *= r / pair.normE(v4);
      Vec u4 = expMap(pair, p, v4);
      double tau = 0.5 * gc.tmax(2.0 * pair.normE(u4 - p.u) + 1e-3);
      double defect = holonomyDefect(pair, p, u4, basis, tau);
      double v0 = pair.normH(logMap(pair, p, u4));
      double bound = (3.0 + std::sqrt(2.0)) * gc.C() * (2.0 * v0 + tau) + (1.0 + std::sqrt(2.0)) * gc.R * tau / mu;
      holonomy.flag(defect <= bound);
    }
  }
  return {sphere.c, speed.c, curve.c, logNorm.c, roundTrip.c, isometry.c, tangency.c, inverse.c,
          diffTransport.c, tmaxBall.c, drift.c, holonomy.c};
}

std::vector<SuiteCheck> geometrySuite(int d, int seeds, std::uint64_t seed) {
  std::vector<SuiteCheck> total;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(seed * 2654435761ULL + static_cast<std::uint64_t>(s) * 97ULL + d);
    HilbertPair pair = randomPair(d, rng);
    auto part = geometrySuite(pair, 1, seed + static_cast<std::uint64_t>(s));
    if (total.empty()) {
      total = part;
      continue;
    }
    for (size_t k = 0; k < part.size(); ++k) {
      total[k].samples += part[k].samples;
      total[k].violations += part[k].violations;
      if (std::isinf(part[k].measured) || part[k].measured > total[k].measured) total[k].measured = part[k].measured;
      if (total[k].limit == 0.0) total[k].measured = total[k].violations;
    }
  }
  for (auto& c : total) c.name += "_d" + std::to_string(d);
  return total;
}

std::vector<SuiteCheck> secondOrderSuite(int probes, std::uint64_t seed) {
  const std::string g = "functional";
  Tracker d2(g, "d2phi_vs_geodesic_second_difference", 1e-4);
  Tracker grad(g, "grad_dual_vs_central_difference", 1e-5);
  Tracker sym(g, "hessian_symmetry", 1e-9);
  Tracker riesz(g, "sphere_gradient_riesz_identity", 1e-9);
  Tracker hess(g, "hessian_at_critical_point_retraction", 1e-6);
  Tracker holder1(g, "holder_first_derivative_violations", 0.0);
  Tracker holder2(g, "holder_second_derivative_violations", 0.0);
  Tracker morse(g, "morse_monotone_in_theta_violations", 0.0);
  Tracker interlace(g, "constrained_free_interlacing_violations", 0.0);

  ProblemConfig cfg;
  cfg.d = 40;
  cfg.rhoMin = 1.0;
  cfg.rhoMax = 2.0;
  NLSProblem nls(cfg);
  ProblemConfig cfg2 = cfg;
  cfg2.bc = "dirichlet";
  cfg2.potential.kind = "well";
  cfg2.potential.V0 = 3.0;
  cfg2.potential.a = 0.3;
  cfg2.potential.b = 0.6;
  NLSProblem well(cfg2);

  for (int s = 0; s < probes; ++s) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(s));
    int kind = s % 3;
    std::unique_ptr<HilbertPair> own;
    std::unique_ptr<ConstrainedFunctional> fq;
    std::unique_ptr<PhiRho> fr;
    const HilbertPair* pair;
    const ConstrainedFunctional* f;
    double mu;
    Vec u;
    if (kind == 0) {
      int d = 12;
      own = std::make_unique<HilbertPair>(randomPair(d, rng));
      Mat A = Mat::Zero(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = std::normal_distribution<double>()(rng);
      fq = std::make_unique<QuadraticFunctional>(*own, 0.5 * (A + A.transpose()), randomVector(d, rng));
      pair = own.get();
      f = fq.get();
      mu = uniform(rng, 0.5, 2.0);
      u = pair->renormalize(randomVector(d, rng), mu);
    } else {
      const NLSProblem& pb = kind == 1 ? nls : well;
      fr = std::make_unique<PhiRho>(pb.family().at(uniform(rng, 1.0, 2.0)));
      pair = &pb.pair();
      f = fr.get();
      mu = pb.mu();
      Vec base = smoothVector(pb.dim(), rng, 1.0);
      if (kind == 2)
        for (int i = 0; i < base.size(); ++i) base(i) *= std::sin(M_PI * (i + 1.0) / (base.size() + 1.0));
      u = pair->renormalize(base, mu);
    }
    const int d = static_cast<int>(u.size());
    SpherePoint p{u, mu};
    Vec a = pair->projectTangentH(p, kind == 0 ? randomVector(d, rng) : smoothVector(d, rng, 0.0));
    a /= pair->normE(a);
    Vec b = pair->projectTangentH(p, randomVector(d, rng));
    b /= pair->normE(b);

    auto phiAlong = [&](double t) { return f->value(expMap(*pair, p, t * a)); };
    auto second = [&](double h) { return (phiAlong(h) - 2.0 * phiAlong(0.0) + phiAlong(-h)) / (h * h); };
    double h = 1e-2;
    double fd = (4.0 * second(0.5 * h) - second(h)) / 3.0;
    double exact = d2phi(*f, *pair, p, a, a);
    double scale = std::max({std::abs(exact), 1e-3 * std::abs(f->value(u)), 1e-6});
    d2.add(std::abs(fd - exact) / scale);

    double hg = 1e-5;
    double fdg = (f->value(u + hg * b) - f->value(u - hg * b)) / (2.0 * hg);
    double ex = f->gradDual(u).dot(b);
    grad.add(std::abs(fdg - ex) / std::max(std::abs(ex), 1e-3 * std::max(1.0, pair->dualNorm(f->gradDual(u)))));

    double ab = a.dot(f->hessAction(u, b)), ba = b.dot(f->hessAction(u, a));
    sym.add(std::abs(ab - ba) / std::max({std::abs(ab), std::abs(ba), 1.0}));

    Vec sg = sphereGradient(*f, *pair, p);
    Vec gd = f->gradDual(u);
    double gn = std::max(1.0, pair->dualNorm(gd));
    for (int k = 0; k < 5; ++k) {
      Vec w = pair->projectTangentH(p, randomVector(d, rng));
      w /= pair->normE(w);
      riesz.add(std::abs(pair->innerE(sg, w) - gd.dot(w)) / gn);
    }

    // Holder data on B(0, R): first and second derivative differences.
    double R = 2.0 + pair->normE(u);
    double M = f->holderM(R);
    Vec x1 = randomVector(d, rng), x2 = x1 + 0.1 * randomVector(d, rng);
    x1 *= uniform(rng, 0.1, 1.0) * R / pair->normE(x1);
    x2 *= uniform(rng, 0.1, 1.0) * R / pair->normE(x2);
    double dist = pair->normE(x1 - x2);
    holder1.flag(pair->dualNorm(f->gradDual(x1) - f->gradDual(x2)) <= M * std::pow(dist, f->alpha()) * (1 + 1e-9));
    holder2.flag(formNormE(*pair, f->hessian(x1) - f->hessian(x2)) <= M * std::pow(dist, f->alpha()) * (1 + 1e-9));

    MorseReport m0 = approxMorseIndex(*f, *pair, p, 0.0);
    MorseReport m1 = approxMorseIndex(*f, *pair, p, 0.1);
    morse.flag(m1.count <= m0.count);
    MorseReport mf = approxMorseIndex(*f, *pair, p, 0.0, true);
    (void)mf;

    // Critical point of a quadratic: generalized eigenvector of (Q, H).
    if (kind == 0) {
      const auto* q = static_cast<const QuadraticFunctional*>(f);
      QuadraticFunctional pure(*pair, q->Q());
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(q->Q(), pair->gramH());
      int idx = static_cast<int>(uniform(rng, 0.0, d - 1e-9));
      SpherePoint c{pair->renormalize(es.eigenvectors().col(idx), mu), mu};
      Vec at = pair->projectTangentH(c, randomVector(d, rng));
      at /= pair->normE(at);
      auto retract = [&](double t) {
        Vec x = c.u + t * at;
        return pure.value(pair->renormalize(x, mu));
      };
      auto sec = [&](double hh) { return (retract(hh) - 2.0 * retract(0.0) + retract(-hh)) / (hh * hh); };
      double fdc = (4.0 * sec(5e-3) - sec(1e-2)) / 3.0;
      double exc = d2phi(pure, *pair, c, at, at);
      hess.add(std::abs(fdc - exc) / std::max(std::abs(exc), 1e-3));
      MorseReport cm = approxMorseIndex(pure, *pair, c, 0.0);
      MorseReport fm = approxMorseIndex(pure, *pair, c, 0.0, true);
      interlace.flag(cm.count <= fm.count && fm.count <= cm.count + 1);
    }
  }
  return {d2.c, grad.c, sym.c, riesz.c, hess.c, holder1.c, holder2.c, morse.c, interlace.c};
}

namespace {

struct DescentTrackers {
  Tracker case12{"deformation", "descent_beta12_violation", kCertificateSlack};
  Tracker case24{"deformation", "descent_beta24_violation", kCertificateSlack};
  Tracker direction{"deformation", "descent_direction_projection_identity", 1e-9};
  Tracker stability{"deformation", "stability_radius_three_quarter_violations", 0.0};

  void suffix(const std::string& s) {
    for (Tracker* t : {&case12, &case24, &direction, &stability}) t->c.name += s;
  }
  std::vector<SuiteCheck> checks() const { return {case12.c, case24.c, direction.c, stability.c}; }
};

// Both certificate variants and the stability radius around u0 with frame basis.
// u0 is critical for the beta/24 variant; the beta/12 variant only needs the frame.
void descentChecksAt(const ConstrainedFunctional& f, const HilbertPair& pair, const SpherePoint& u0,
                     const Mat& basis, double beta, std::mt19937_64& rng, DescentTrackers& tr) {
  const int d = pair.dim();
  const int n = static_cast<int>(basis.cols()) - 1;
  const double mu = u0.mu;
  GeometryConstants gc;
  gc.R = pair.normE(u0.u) + 1.5;
  gc.mu = mu;
  gc.K = f.boundK(gc.R, mu);
  gc.M = std::max(1.0, f.holderM(gc.R));
  gc.alpha = f.alpha();
  gc.n = n;
  double d3 = gc.delta3(beta);
  double tmax = gc.tmax(d3);

  Vec v = pair.projectTangentH(u0, randomVector(d, rng));
  v *= uniform(rng, 0.0, 0.45) * d3 / pair.normE(v);
  Vec u = pair.renormalize(expMap(pair, u0, v), mu);
  for (int it = 0; it < 60 && !(pair.normE(u - u0.u) < 0.5 * d3); ++it) {
    v *= 0.5;
    u = pair.renormalize(expMap(pair, u0, v), mu);
  }
  for (double frac : {0.125, 0.25, uniform(rng, 0.01, 0.99)}) {
    DescentCertificate c = descentStep(f, pair, gc, u0, basis, u, beta, frac * tmax);
    tr.case12.add(c.violation);
  }

  Mat F = transportFrame(pair, u0, basis, u);
  auto dir = descentDirection(f, pair, SpherePoint{u, mu}, F);
  if (dir) {
    Vec sg = sphereGradient(f, pair, SpherePoint{u, mu});
    Mat EF = pair.gramE() * F;
    Vec coef = (F.transpose() * EF).ldlt().solve(EF.transpose() * sg);
    double pn = pair.normE(F * coef);
    tr.direction.add(std::abs(pair.innerE(sg, *dir) + pn) / std::max(1.0, pn));
  }

  double t = uniform(rng, 0.05, 0.95) * tmax;
  Vec vz = pair.projectTangentH(u0, randomVector(d, rng));
  double r = 0.25 * d3;
  Vec z = u0.u;
  for (int it = 0; it < 80; ++it, r *= 0.5) {
    Vec cand = pair.renormalize(expMap(pair, u0, vz * (r / pair.normE(vz))), mu);
    if (neighborhoodAssertions(f, pair, gc, u0, basis, u0.u, cand, beta, t).holds()) {
      z = cand;
      break;
    }
  }
  // Below rounding resolution only z = u0 itself is admissible.
  Mat Fz = transportFrame(pair, u0, basis, z);
  Vec w = Fz * randomVector(n + 1, rng);
  DescentCertificate c24 = neighborhoodStep(f, pair, gc, u0, basis, u0.u, z, w, beta, t, t);
  tr.case24.add(c24.violation);

  double d1 = stabilityRadius(f, pair, u0, basis, beta, gc.R);
  Vec vs = pair.projectTangentH(u0, randomVector(d, rng));
  Vec us = expMap(pair, u0, vs * (0.9 * d1 / pair.normE(vs)));
  for (int it = 0; it < 60 && !(pair.normE(us - u0.u) < d1); ++it) {
    vs *= 0.5;
    us = expMap(pair, u0, vs * (0.9 * d1 / pair.normE(vs)));
  }
  Mat D = d2phiMatrix(f, pair, SpherePoint{us, mu});
  tr.stability.flag(maxRayleighOnSpan(D, pair, basis) < -0.75 * beta);
}

}  // namespace

std::vector<SuiteCheck> descentSuite(int instances, std::uint64_t seed) {
  DescentTrackers tr;
  int done = 0;
  for (int s = 0; done < instances && s < 20 * instances; ++s) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(s) * 31ULL);
    int d = 6 + static_cast<int>(uniform(rng, 0.0, 14.999));
    int n = static_cast<int>(uniform(rng, 0.0, 2.999));
    HilbertPair pair = randomPair(d, rng);
    Mat A(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) A(i, j) = std::normal_distribution<double>()(rng);
    Mat Q = 0.5 * (A + A.transpose());
    QuadraticFunctional f(pair, Q);
    double mu = uniform(rng, 0.5, 2.0);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Q, pair.gramH());
    int k = n + 1 + static_cast<int>(uniform(rng, 0.0, d - n - 1.001));
    SpherePoint u0{pair.renormalize(es.eigenvectors().col(k), mu), mu};
    MorseReport rep = approxMorseIndex(f, pair, u0, 0.0);
    if (rep.count < n + 1) continue;
    double beta = std::min(0.9, 0.5 * std::abs(rep.eigenvalues[n]));
    if (!(beta > 1e-6)) continue;
    Mat basis = approxMorseIndex(f, pair, u0, beta).basis.leftCols(n + 1);
    ++done;
    descentChecksAt(f, pair, u0, basis, beta, rng, tr);
  }
  return tr.checks();
}

std::vector<SuiteCheck> harvestedDescentSuite(const ConstrainedFunctional& f, const HilbertPair& pair,
                                              const std::vector<Vec>& points, double mu, int repeats,
                                              std::uint64_t seed) {
  DescentTrackers tr;
  tr.suffix("_nls");
  Tracker harvested("deformation", "negative_directions_harvested_nls", 0.0);
  std::mt19937_64 rng(seed);
  int found = 0;
  for (const Vec& x : points) {
    SpherePoint u0{pair.renormalize(x, mu), mu};
    MorseReport rep = approxMorseIndex(f, pair, u0, 0.0);
    if (rep.count < 1) continue;
    double beta = std::min(0.9, 0.5 * std::abs(rep.eigenvalues[0]));
    if (!(beta > 1e-6)) continue;
    Mat basis = approxMorseIndex(f, pair, u0, beta).basis.leftCols(1);
    if (basis.cols() < 1) continue;
    ++found;
    for (int r = 0; r < repeats; ++r) descentChecksAt(f, pair, u0, basis, beta, rng, tr);
  }
  harvested.flag(found > 0);
  std::vector<SuiteCheck> out = tr.checks();
  out.push_back(harvested.c);
  return out;
}

SuiteCheck retractionHessianCheck(const ConstrainedFunctional& f, const HilbertPair& pair, const Vec& u, double mu,
                                  int directions, std::uint64_t seed) {
  Tracker hess("functional", "hessian_at_critical_point_nls", 1e-6);
  std::mt19937_64 rng(seed);
  SpherePoint c{u, mu};
  const int d = pair.dim();
  for (int k = 0; k < directions; ++k) {
    Vec a = pair.projectTangentH(c, smoothVector(d, rng, 0.0));
    a /= pair.normE(a);
    auto retract = [&](double t) { return f.value(pair.renormalize(c.u + t * a, mu)); };
    auto sec = [&](double hh) { return (retract(hh) - 2.0 * retract(0.0) + retract(-hh)) / (hh * hh); };
    double fdc = (4.0 * sec(5e-3) - sec(1e-2)) / 3.0;
    double exc = d2phi(f, pair, c, a, a);
    hess.add(std::abs(fdc - exc) / std::max(std::abs(exc), 1e-3));
  }
  return hess.c;
}

CoverAudit auditCover(const CoverReport& cover, const Vec& lo, const Vec& hi, int gridPerAxis) {
  CoverAudit a;
  const int n = cover.n;
  const int k = static_cast<int>(cover.centers.cols());
  auto countAt = [&](const Vec& x, double radius, bool strict) {
    int c = 0;
    for (int j = 0; j < k; ++j) {
      double dist = (cover.centers.col(j) - x).norm();
      if (strict ? dist < radius : dist <= radius) ++c;
    }
    return c;
  };
  std::vector<Vec> probes;
  Vec ext = Vec::Constant(n, cover.eps);
  for (int pass = 0; pass < 2; ++pass) {
    Vec a0 = pass == 0 ? lo : Vec(lo - ext), a1 = pass == 0 ? hi : Vec(hi + ext);
    std::vector<int> idx(n, 0);
    while (true) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = a0(i) + (a1(i) - a0(i)) * idx[i] / std::max(1, gridPerAxis - 1);
      ++a.gridPoints;
      if (pass == 0) {
        if (countAt(x, cover.innerRadius, true) == 0) a.covered = false;
      } else {
        a.maxMultiplicity = std::max(a.maxMultiplicity, countAt(x, cover.outerRadius, false));
      }
      int i = 0;
      while (i < n && ++idx[i] >= gridPerAxis) idx[i++] = 0;
      if (i == n) break;
    }
  }
  for (int j = 0; j < k; ++j) a.maxMultiplicity = std::max(a.maxMultiplicity, countAt(cover.centers.col(j), cover.outerRadius, false));
  return a;
}

std::vector<SuiteCheck> coverSuite(int boxes, std::uint64_t seed) {
  const std::string g = "deformation";
  std::vector<SuiteCheck> out;
  for (int n = 1; n <= 2; ++n) {
    Tracker coverage(g, "cover_coverage_failures_n" + std::to_string(n), 0.0);
    Tracker mult(g, "cover_multiplicity_excess_n" + std::to_string(n), 0.0);
    Tracker bound(g, "cover_multiplicity_bound_excess_n" + std::to_string(n), 0.0);
    for (int b = 0; b < boxes; ++b) {
      std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(b) * 17ULL + n);
      Vec lo(n), hi(n);
      for (int i = 0; i < n; ++i) {
        lo(i) = uniform(rng, -1.0, 1.0);
        hi(i) = lo(i) + uniform(rng, 0.0, 1.0);
      }
      double eps = uniform(rng, 0.2, 0.6);
      CoverReport cover = buildCoverBox(lo, hi, eps);
      CoverAudit a = auditCover(cover, lo, hi, n == 1 ? 4000 : 120);
      coverage.flag(a.covered);
      mult.flag(a.maxMultiplicity <= cover.maxMultiplicity);
      bound.flag(cover.N <= CoverReport::multiplicityBound(n));
    }
    out.push_back(coverage.c);
    out.push_back(mult.c);
    out.push_back(bound.c);
  }
  return out;
}

std::vector<SuiteCheck> verifyLemmas(std::uint64_t seed, bool quick) {
  std::vector<SuiteCheck> all;
  auto append = [&](std::vector<SuiteCheck> part) { all.insert(all.end(), part.begin(), part.end()); };
  int seeds = quick ? 20 : 500;
  for (int d : {3, 50, 400}) append(geometrySuite(d, d == 400 && quick ? 5 : seeds, seed));
  append(secondOrderSuite(quick ? 30 : 200, seed));
  append(descentSuite(quick ? 50 : 500, seed));
  append(coverSuite(quick ? 10 : 100, seed));
  return all;
}

}  // namespace mps
