#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mpsphere/cli.hpp"
#include "mpsphere/io.hpp"
#include "mpsphere/minmax.hpp"
#include "mpsphere/problems.hpp"
#include "mpsphere/suite.hpp"
#include "oracles.hpp"

using namespace mps;
namespace fs = std::filesystem;

namespace {

const std::string kSource = MPSPHERE_SOURCE_DIR;
const std::string kCli = MPSPHERE_CLI;
constexpr std::uint64_t kSeed = 20240611;

// Pinned tolerances and budgets.
constexpr double kGeometrySeconds = 120.0;
constexpr int kGeometrySeeds = 500;
constexpr int kSecondOrderProbes = 200;
constexpr int kDescentInstances = 500;
constexpr int kCoverBoxes = 100;
constexpr double kMonotoneSlack = 1e-9;
constexpr double kSweepSeconds = 600.0;
constexpr double kShootingTol = 1e-3;
constexpr double kConstantLambdaTol = 1e-10;
constexpr double kMinOrder = 1.8;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

void absorb(Outcome& o, const std::vector<SuiteCheck>& checks) {
  for (const auto& c : checks) {
    if (c.pass()) continue;
    o.pass = false;
    std::ostringstream os;
    os << " " << c.group << "/" << c.name << " measured=" << c.measured << " limit=" << c.limit
       << " violations=" << c.violations;
    o.detail += os.str();
  }
}

int countSamples(const std::vector<SuiteCheck>& checks) {
  int s = 0;
  for (const auto& c : checks) s += c.samples;
  return s;
}

ProblemConfig loadConfig(const std::string& name) {
  return configFromJson(loadJson(kSource + "/configs/" + name));
}

StringOptions stringOptionsFor(const ProblemConfig& cfg) {
  StringOptions so;
  so.maxIters = cfg.pathIters;
  return so;
}

struct SolveFixture {
  ProblemConfig cfg;
  std::unique_ptr<NLSProblem> problem;
  SolveReport report;
  double seconds = 0.0;
};

const SolveFixture& solveFixture() {
  static std::optional<SolveFixture> fx;
  if (!fx) {
    fx.emplace();
    fx->cfg = loadConfig("nls_interval.json");
    fx->problem = std::make_unique<NLSProblem>(fx->cfg);
    SolveOptions so;
    so.string = stringOptionsFor(fx->cfg);
    auto t0 = Clock::now();
    fx->report = runSolve(*fx->problem, so);
    fx->seconds = since(t0);
  }
  return *fx;
}

Outcome criterion1() {
  Outcome o;
  auto t0 = Clock::now();
  int samples = 0;
  for (int d : {3, 50, 400}) {
    auto checks = geometrySuite(d, kGeometrySeeds, kSeed + d);
    samples += countSamples(checks);
    absorb(o, checks);
  }
  double s = since(t0);
  if (s > kGeometrySeconds) o.pass = false;
  o.detail = "samples=" + std::to_string(samples) + " seconds=" + std::to_string(s) + o.detail;
  return o;
}

Outcome criterion2() {
  Outcome o;
  auto checks = secondOrderSuite(kSecondOrderProbes, kSeed);
  const auto& fx = solveFixture();
  PhiRho phi = fx.problem->family().at(fx.report.rho);
  SuiteCheck h = retractionHessianCheck(phi, fx.problem->pair(), fx.report.limit.u, fx.problem->mu(), 20, kSeed);
  checks.push_back(h);
  absorb(o, checks);
  std::ostringstream os;
  os << "probes=" << kSecondOrderProbes << " hessian_at_critical_point=" << h.measured;
  o.detail = os.str() + o.detail;
  return o;
}

Outcome criterion3() {
  Outcome o;
  auto checks = descentSuite(kDescentInstances, kSeed);
  const auto& fx = solveFixture();
  PhiRho phi = fx.problem->family().at(fx.report.rho);
  std::vector<Vec> harvest{fx.report.limit.u};
  for (const auto& r : fx.report.records)
    if (r.accepted) harvest.push_back(r.u);
  auto nls = harvestedDescentSuite(phi, fx.problem->pair(), harvest, fx.problem->mu(), 3, kSeed);
  checks.insert(checks.end(), nls.begin(), nls.end());
  absorb(o, checks);
  int violations = 0;
  for (const auto& c : checks) violations += c.violations;
  o.detail = "instances=" + std::to_string(kDescentInstances) + " harvested_points=" + std::to_string(harvest.size()) +
             " violations=" + std::to_string(violations) + o.detail;
  return o;
}

Outcome criterion4() {
  Outcome o;
  auto checks = coverSuite(kCoverBoxes, kSeed);
  absorb(o, checks);
  o.detail = "boxes=" + std::to_string(kCoverBoxes) + " checks=" + std::to_string(checks.size()) + o.detail;
  return o;
}

Outcome criterion5() {
  Outcome o;
  ProblemConfig cfg = loadConfig("nls_sweep.json");
  auto t0 = Clock::now();
  NLSProblem problem(cfg);
  auto [w1, w2] = problem.endpoints();
  std::vector<DiscretePath> pool{geodesicPath(problem.pair(), w1, w2, cfg.mu, cfg.pathNodes)};
  auto rows = rhoSweep(problem.family(), problem.pair(), rhoGrid(cfg.rhoMin, cfg.rhoMax, cfg.rhoSteps), pool,
                       stringOptionsFor(cfg));
  double s = since(t0);
  double worstRise = -1e300;
  for (size_t i = 1; i < rows.size(); ++i) worstRise = std::max(worstRise, rows[i].c - rows[i - 1].c);
  o.pass = static_cast<int>(rows.size()) == cfg.rhoSteps && worstRise <= kMonotoneSlack && s <= kSweepSeconds;
  std::ostringstream os;
  os << "d=" << cfg.d << " points=" << rows.size() << " worst_rise=" << worstRise << " seconds=" << s;
  o.detail = os.str();
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto& fx = solveFixture();
  absorb(o, solveChecks(fx.report, *fx.problem));
  const ProblemConfig& cfg = fx.cfg;
  auto shot = oracle::shootNeumann(fx.report.rho, cfg.p, cfg.mu, cfg.L, 1.377, -2.718);
  double shootErr = std::abs(fx.report.limit.value - shot.value);
  if (!shot.converged || shootErr > kShootingTol) o.pass = false;
  ConstantSolution cs = fx.problem->constantSolutionOracle(fx.report.rho);
  PhiRho phi = fx.problem->family().at(fx.report.rho);
  double lam = -lagrangeEstimate(phi, SpherePoint{cs.u, cfg.mu});
  double lamErr = std::abs(lam - fx.report.rho * std::pow(cfg.mu / cfg.L, (cfg.p - 2.0) / 2.0));
  if (lamErr > kConstantLambdaTol) o.pass = false;
  std::ostringstream os;
  os << "rho=" << fx.report.rho << " records=" << fx.report.records.size() << " value=" << fx.report.limit.value
     << " shooting=" << shot.value << " shooting_error=" << shootErr << " el_residual=" << fx.report.limit.elResidual
     << " m=" << fx.report.limit.morseIndex << " m_f=" << fx.report.limit.freeMorseIndex
     << " constant_lambda_error=" << lamErr << " seconds=" << fx.seconds;
  o.detail = os.str() + o.detail;
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto& fx = solveFixture();
  std::vector<double> values;
  std::ostringstream os;
  for (int d : {100, 200, 400}) {
    ProblemConfig cfg = fx.cfg;
    cfg.d = d;
    NLSProblem problem(cfg);
    Vec start = problem.transferFrom(*fx.problem, fx.report.limit.u);
    CriticalPointReport r = refineAndCertifyLimit(problem.family(), problem.pair(), fx.report.rho, start, cfg.mu);
    if (!r.converged || r.morseIndex != 1) o.pass = false;
    values.push_back(r.value);
    os << " c" << d << "=" << r.value;
  }
  double order = std::log2(std::abs(values[0] - values[1]) / std::abs(values[1] - values[2]));
  if (!(order >= kMinOrder)) o.pass = false;
  char buf[64];
  std::snprintf(buf, sizeof buf, "order=%.4f", order);
  o.detail = buf + os.str();
  return o;
}

std::string slurp(const fs::path& p) { return fs::exists(p) ? readText(p.string()) : std::string("<missing>"); }

Outcome criterion8() {
  Outcome o;
  fs::path root = fs::temp_directory_path() / "mpsphere_acceptance_determinism";
  fs::remove_all(root);
  auto run = [&](const std::string& args, const fs::path& out) {
    std::string cmd = "\"" + kCli + "\" " + args + " --seed 7 --out \"" + out.string() + "\" > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  struct Job {
    std::string args;
    std::vector<std::string> files;
  };
  std::string quick = kSource + "/configs/nls_interval_quick.json";
  std::vector<Job> jobs{{"verify-lemmas --quick", {"verify_lemmas.json"}},
                        {"solve --config \"" + quick + "\"", {"ps_records.jsonl", "critical_point.json", "mp_curve.csv"}}};
  int compared = 0;
  for (size_t j = 0; j < jobs.size(); ++j) {
    fs::path a = root / ("job" + std::to_string(j) + "_a"), b = root / ("job" + std::to_string(j) + "_b");
    if (run(jobs[j].args, a) != 0 || run(jobs[j].args, b) != 0) {
      o.pass = false;
      o.detail += " command failed: " + jobs[j].args;
      continue;
    }
    for (const auto& f : jobs[j].files) {
      std::string x = slurp(a / f), y = slurp(b / f);
      ++compared;
      if (x == "<missing>" || x != y) {
        o.pass = false;
        o.detail += " differs: " + f;
      }
    }
  }
  o.detail = "files_compared=" + std::to_string(compared) + o.detail;
  return o;
}

}  // namespace

int main() {
  std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                 criterion5, criterion6, criterion7, criterion8};
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
