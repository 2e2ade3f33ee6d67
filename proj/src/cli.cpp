#include "mpsphere/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "mpsphere/errors.hpp"
#include "mpsphere/io.hpp"
#include "mpsphere/kernels.hpp"
#include "mpsphere/log.hpp"
#include "mpsphere/suite.hpp"

namespace mps {

namespace {

struct Flags {
  std::string config;
  std::string out = "out";
  std::string input;
  std::uint64_t seed = 0;
  bool seedGiven = false;
  int threads = 0;
  bool check = false;
  bool quick = false;
  bool serial = false;
  double theta = 0.0;
  double rho = -1.0;
  int samples = 100;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

Json checksJson(const std::vector<SuiteCheck>& checks) {
  Json arr = Json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass();
    arr.push_back({{"group", c.group},
                   {"name", c.name},
                   {"measured", c.measured},
                   {"limit", c.limit},
                   {"samples", c.samples},
                   {"violations", c.violations},
                   {"pass", c.pass()}});
  }
  return Json{{"pass", all}, {"checks", arr}};
}

bool allPass(const std::vector<SuiteCheck>& checks) {
  for (const auto& c : checks)
    if (!c.pass()) return false;
  return true;
}

ProblemConfig problemConfig(const Flags& f) {
  if (f.config.empty()) throw Error(ErrorKind::Config, "--config is required");
  ProblemConfig cfg = loadConfig(f.config);
  if (f.seedGiven) cfg.seed = f.seed;
  return cfg;
}

StringOptions stringOptions(const ProblemConfig& cfg, const Flags& f) {
  StringOptions so;
  so.maxIters = cfg.pathIters;
  so.exec = f.serial ? Exec::Serial : Exec::Parallel;
  return so;
}

int cmdGeometry(const Flags& f) {
  Stopwatch sw;
  std::unique_ptr<HilbertPair> pair;
  Json cfgJson = Json::object();
  if (!f.config.empty()) {
    Json j = loadJson(f.config);
    cfgJson = j;
    if (j.contains("gramE")) {
      pair = std::make_unique<HilbertPair>(pairFromJson(j));
    } else {
      NLSProblem problem(configFromJson(j));
      pair = std::make_unique<HilbertPair>(problem.pair());
    }
  } else {
    std::mt19937_64 rng(f.seed);
    pair = std::make_unique<HilbertPair>(randomPair(50, rng));
  }
  auto checks = geometrySuite(*pair, f.samples, f.seed);
  Json rep = checksJson(checks);
  rep["dim"] = pair->dim();
  rep["seed"] = f.seed;
  rep["injection_rescale"] = pair->rescaleFactor();
  Manifest m("geometry-check", cfgJson, f.seed, threadCount());
  m.emit(f.out, "geometry_check.json", rep.dump(2) + "\n");
  m.addTiming("geometry-check", sw.seconds());
  m.write(f.out);
  std::cout << (allPass(checks) ? "geometry-check: PASS" : "geometry-check: FAIL") << "\n";
  return allPass(checks) ? 0 : exitCodeFor(ErrorKind::GeometryFailure);
}

int cmdMorse(const Flags& f) {
  Stopwatch sw;
  ProblemConfig cfg = problemConfig(f);
  NLSProblem problem(cfg);
  if (f.input.empty()) throw Error(ErrorKind::Config, "--input (JSON with a 'u' array) is required");
  Json in = loadJson(f.input);
  if (!in.contains("u")) throw Error(ErrorKind::Config, "input has no 'u' array");
  auto uv = in.at("u").get<std::vector<double>>();
  if (static_cast<int>(uv.size()) != problem.dim()) throw Error(ErrorKind::DimensionMismatch, "iterate size differs from d");
  Vec u = Eigen::Map<Vec>(uv.data(), uv.size());
  double rho = f.rho > 0.0 ? f.rho : (in.contains("rho") ? in.at("rho").get<double>() : cfg.rho);
  PhiRho phi = problem.family().at(rho);
  SpherePoint p{problem.pair().renormalize(u, cfg.mu), cfg.mu};
  MorseReport c = approxMorseIndex(phi, problem.pair(), p, f.theta);
  MorseReport fr = approxMorseIndex(phi, problem.pair(), p, f.theta, true);
  auto head = [](const std::vector<double>& ev) {
    return std::vector<double>(ev.begin(), ev.begin() + std::min<size_t>(ev.size(), 8));
  };
  Json rep{{"rho", rho},
           {"theta", f.theta},
           {"count", c.count},
           {"free_count", fr.count},
           {"eigenvalues", head(c.eigenvalues)},
           {"free_eigenvalues", head(fr.eigenvalues)},
           {"value", phi.value(p.u)},
           {"dual_norm", constrainedDualNorm(phi, problem.pair(), p)},
           {"lagrange", lagrangeEstimate(phi, p)}};
  Manifest m("morse", configToJson(cfg), cfg.seed, threadCount());
  m.emit(f.out, "morse.json", rep.dump(2) + "\n");
  m.addTiming("morse", sw.seconds());
  m.write(f.out);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmdCurve(const Flags& f) {
  Stopwatch sw;
  ProblemConfig cfg = problemConfig(f);
  NLSProblem problem(cfg);
  auto [w1, w2] = problem.endpoints();
  std::vector<DiscretePath> pool{geodesicPath(problem.pair(), w1, w2, cfg.mu, cfg.pathNodes)};
  auto rows = rhoSweep(problem.family(), problem.pair(), rhoGrid(cfg.rhoMin, cfg.rhoMax, cfg.rhoSteps), pool,
                       stringOptions(cfg, f));
  Manifest m("mp-curve", configToJson(cfg), cfg.seed, threadCount());
  m.emit(f.out, "mp_curve.csv", sweepCsv(rows));
  m.addTiming("sweep", sw.seconds());
  m.write(f.out);
  bool monotone = true;
  for (size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].c <= rows[i - 1].c + 1e-9;
  std::cout << "mp-curve: " << rows.size() << " rows, " << (monotone ? "non-increasing" : "NOT non-increasing")
            << "\n";
  return monotone ? 0 : exitCodeFor(ErrorKind::CertificationFailure);
}

int cmdSolve(const Flags& f) {
  Stopwatch sw;
  ProblemConfig cfg = problemConfig(f);
  NLSProblem problem(cfg);
  SolveOptions so;
  so.string = stringOptions(cfg, f);
  SolveReport rep = runSolve(problem, so);
  Manifest m("solve", configToJson(cfg), cfg.seed, threadCount());
  std::vector<Json> lines;
  for (const auto& r : rep.records) lines.push_back(toJson(r));
  m.emit(f.out, "ps_records.jsonl", jsonLines(lines));
  Json cp = toJson(rep.limit);
  Json summary{{"rho", rep.rho},
               {"c_rho", rep.cRho},
               {"slope", rep.slope},
               {"alpha1", rep.alpha1},
               {"K", rep.tops.K},
               {"observed_max_norm", rep.tops.observedMaxNorm},
               {"rho_n", rep.tops.rhoN},
               {"eps_n", rep.tops.epsN},
               {"b_n", rep.tops.bN},
               {"max_phi_rho", rep.tops.maxPhiRho}};
  Json doc{{"summary", summary}, {"critical_point", cp}};
  m.emit(f.out, "critical_point.json", doc.dump(2) + "\n");
  m.emit(f.out, "mp_curve.csv", sweepCsv(rep.sweep));
  int code = 0;
  if (f.check) {
    auto checks = solveChecks(rep, problem);
    m.emit(f.out, "solve_check.json", checksJson(checks).dump(2) + "\n");
    for (const auto& c : checks)
      std::cout << (c.pass() ? "PASS " : "FAIL ") << c.name << " measured=" << c.measured << " limit=" << c.limit
                << "\n";
    if (!allPass(checks)) code = exitCodeFor(ErrorKind::CertificationFailure);
  }
  m.addTiming("solve", sw.seconds());
  m.write(f.out);
  std::cout << "solve: c_rho=" << rep.cRho << " value=" << rep.limit.value << " lambda=" << rep.limit.lambda
            << " m=" << rep.limit.morseIndex << " m_f=" << rep.limit.freeMorseIndex << "\n";
  return code;
}

int cmdVerify(const Flags& f) {
  Stopwatch sw;
  auto checks = verifyLemmas(f.seed, f.quick);
  Json rep = checksJson(checks);
  rep["seed"] = f.seed;
  rep["quick"] = f.quick;
  Manifest m("verify-lemmas", Json{{"quick", f.quick}}, f.seed, threadCount());
  m.emit(f.out, "verify_lemmas.json", rep.dump(2) + "\n");
  m.addTiming("verify-lemmas", sw.seconds());
  m.write(f.out);
  for (const auto& c : checks)
    if (!c.pass()) std::cout << "FAIL " << c.group << "/" << c.name << " measured=" << c.measured << "\n";
  std::cout << "verify-lemmas: " << (allPass(checks) ? "PASS" : "FAIL") << " (" << checks.size() << " checks)\n";
  return allPass(checks) ? 0 : exitCodeFor(ErrorKind::CertificationFailure);
}

}  // namespace

std::vector<SuiteCheck> solveChecks(const SolveReport& rep, const NLSProblem& problem) {
  auto check = [](const char* name, double measured, double limit, int samples, int violations) {
    SuiteCheck c;
    c.group = "solve";
    c.name = name;
    c.measured = measured;
    c.limit = limit;
    c.samples = samples;
    c.violations = violations;
    return c;
  };
  std::vector<SuiteCheck> out;
  int accepted = 0, dualBad = 0, normBad = 0, morseBad = 0, signBad = 0, zetaBad = 0;
  double worstDual = 0.0, worstNorm = 0.0, minNodal = 0.0;
  int maxMorse = 0;
  double prevZeta = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.records) {
    if (!(r.zeta < prevZeta)) ++zetaBad;
    prevZeta = r.zeta;
    if (!r.accepted) continue;
    ++accepted;
    worstDual = std::max(worstDual, r.dualNorm / (3.0 * r.zeta));
    if (r.dualNorm > 3.0 * r.zeta) ++dualBad;
    worstNorm = std::max(worstNorm, r.norm / rep.tops.K);
    if (r.norm > rep.tops.K) ++normBad;
    maxMorse = std::max(maxMorse, r.morseCount);
    if (r.morseCount > 1) ++morseBad;
    minNodal = std::min(minNodal, r.minNodal);
    if (r.minNodal < 0.0) ++signBad;
  }
  const int n = static_cast<int>(rep.records.size());
  out.push_back(check("accepted_records_missing", accepted == n ? 0.0 : n - accepted, 0.0, n, n - accepted));
  out.push_back(check("records_dual_norm_over_3zeta", worstDual, 1.0, accepted, dualBad));
  out.push_back(check("records_norm_over_K", worstNorm, 1.0, accepted, normBad));
  out.push_back(check("records_morse_count", maxMorse, 1.0, accepted, morseBad));
  out.push_back(check("records_zeta_not_decreasing", zetaBad, 0.0, n, zetaBad));
  out.push_back(check("records_negative_nodal_part", -minNodal, 0.0, accepted, signBad));
  const auto& L = rep.limit;
  out.push_back(check("limit_euler_lagrange_residual", L.elResidual, 1e-8, 1, L.elResidual > 1e-8));
  out.push_back(check("limit_morse_index", L.morseIndex, 1.0, 1, L.morseIndex > 1));
  out.push_back(check("limit_free_morse_index", L.freeMorseIndex, 2.0, 1, L.freeMorseIndex > 2));
  bool inter = L.morseIndex <= L.freeMorseIndex && L.freeMorseIndex <= L.morseIndex + 1;
  out.push_back(check("limit_interlacing_violation", inter ? 0.0 : 1.0, 0.0, 1, !inter));
  out.push_back(check("limit_mass_error_rel", L.massError / problem.mu(), 1e-9, 1, L.massError > 1e-9 * problem.mu()));
  int mono = 0;
  double worstRise = 0.0;
  for (size_t i = 1; i < rep.sweep.size(); ++i) {
    double rise = rep.sweep[i].c - rep.sweep[i - 1].c;
    worstRise = std::max(worstRise, rise);
    if (rise > 1e-9) ++mono;
  }
  out.push_back(check("sweep_c_rise", worstRise, 1e-9, static_cast<int>(rep.sweep.size()), mono));
  const ProblemConfig& cfg = problem.config();
  if (cfg.potential.kind == "zero" && cfg.type == "interval" && cfg.bc == "neumann") {
    ConstantSolution cs = problem.constantSolutionOracle(rep.rho);
    PhiRho phi = problem.family().at(rep.rho);
    SpherePoint p{cs.u, cfg.mu};
    double el = eulerLagrangeResidual(phi, problem.pair(), p);
    double expected = rep.rho * std::pow(cfg.mu / cfg.L, (cfg.p - 2.0) / 2.0);
    double err = std::abs(-lagrangeEstimate(phi, p) - expected);
    out.push_back(check("constant_oracle_residual", el, 1e-10, 1, el > 1e-10));
    out.push_back(check("constant_oracle_lambda_error", err, 1e-10, 1, err > 1e-10));
  }
  PhiRho phi = problem.family().at(rep.rho);
  SuiteCheck hc = retractionHessianCheck(phi, problem.pair(), L.u, problem.mu(), 20, cfg.seed);
  hc.group = "solve";
  out.push_back(hc);
  std::vector<Vec> harvest{L.u};
  for (const auto& r : rep.records)
    if (r.accepted) harvest.push_back(r.u);
  for (auto c : harvestedDescentSuite(phi, problem.pair(), harvest, problem.mu(), 3, cfg.seed)) {
    c.group = "solve";
    out.push_back(c);
  }
  return out;
}

int runCli(int argc, char** argv) {
  CLI::App app{"Constrained mountain-pass solver on mass spheres"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "problem or pair JSON");
    sub->add_option("--seed", f.seed, "random seed")->each([&](const std::string&) { f.seedGiven = true; });
    sub->add_option("--threads", f.threads, "OpenMP threads (0 = default)");
    sub->add_option("--out", f.out, "output directory");
    sub->add_flag("--serial", f.serial, "use the serial node kernels");
  };
  auto* geo = app.add_subcommand("geometry-check", "geometry invariants for one pair");
  common(geo);
  geo->add_option("--samples", f.samples, "random samples");
  auto* morse = app.add_subcommand("morse", "approximate Morse index of a stored iterate");
  common(morse);
  morse->add_option("--input", f.input, "JSON file holding 'u'");
  morse->add_option("--theta", f.theta, "threshold");
  morse->add_option("--rho", f.rho, "rho (default from input or config)");
  auto* curve = app.add_subcommand("mp-curve", "rho sweep of the mountain-pass level");
  common(curve);
  auto* solve = app.add_subcommand("solve", "full pipeline");
  common(solve);
  solve->add_flag("--check", f.check, "evaluate acceptance checks");
  auto* verify = app.add_subcommand("verify-lemmas", "randomized invariant suite");
  common(verify);
  verify->add_flag("--quick", f.quick, "reduced sample counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : exitCodeFor(ErrorKind::Config);
  }
  try {
    if (f.threads > 0) setThreadCount(f.threads);
    std::filesystem::create_directories(f.out);
    if (*geo) return cmdGeometry(f);
    if (*morse) return cmdMorse(f);
    if (*curve) return cmdCurve(f);
    if (*solve) return cmdSolve(f);
    if (*verify) return cmdVerify(f);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exitCodeFor(ErrorKind::Config);
  }
  return exitCodeFor(ErrorKind::Config);
}

}  // namespace mps
