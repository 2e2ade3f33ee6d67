#include "mpsphere/io.hpp"

#include <openssl/evp.h>

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mpsphere/errors.hpp"

namespace mps {

namespace {

template <class T>
T get(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string formatDouble(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

ProblemConfig configFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
  static const char* known[] = {"type", "L", "edges", "d", "p", "mu", "rho_min", "rho_max", "rho_steps",
                                "bc", "potential", "seed", "rho", "path_nodes", "path_iters", "ps_records",
                                "spike_margin", "refine_tol"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw Error(ErrorKind::Config, "unknown config key '" + it.key() + "'");
  }
  ProblemConfig c;
  c.type = get<std::string>(j, "type", c.type);
  c.L = get<double>(j, "L", c.L);
  c.edges = get<std::vector<double>>(j, "edges", c.edges);
  c.d = get<int>(j, "d", c.d);
  c.p = get<double>(j, "p", c.p);
  c.mu = get<double>(j, "mu", c.mu);
  c.rhoMin = get<double>(j, "rho_min", c.rhoMin);
  c.rhoMax = get<double>(j, "rho_max", c.rhoMax);
  c.rhoSteps = get<int>(j, "rho_steps", c.rhoSteps);
  c.bc = get<std::string>(j, "bc", c.bc);
  c.seed = get<std::uint64_t>(j, "seed", c.seed);
  c.rho = get<double>(j, "rho", c.rho);
  c.pathNodes = get<int>(j, "path_nodes", c.pathNodes);
  c.pathIters = get<int>(j, "path_iters", c.pathIters);
  c.psRecords = get<int>(j, "ps_records", c.psRecords);
  c.spikeMargin = get<double>(j, "spike_margin", c.spikeMargin);
  c.refineTol = get<double>(j, "refine_tol", c.refineTol);
  if (j.contains("potential")) {
    const Json& p = j.at("potential");
    c.potential.kind = get<std::string>(p, "kind", c.potential.kind);
    c.potential.V0 = get<double>(p, "V0", c.potential.V0);
    c.potential.a = get<double>(p, "a", c.potential.a);
    c.potential.b = get<double>(p, "b", c.potential.b);
  }
  validateConfig(c);
  return c;
}

Json configToJson(const ProblemConfig& c) {
  Json j;
  j["type"] = c.type;
  j["L"] = c.L;
  j["edges"] = c.edges;
  j["d"] = c.d;
  j["p"] = c.p;
  j["mu"] = c.mu;
  j["rho_min"] = c.rhoMin;
  j["rho_max"] = c.rhoMax;
  j["rho_steps"] = c.rhoSteps;
  j["bc"] = c.bc;
  j["potential"] = {{"kind", c.potential.kind}, {"V0", c.potential.V0}, {"a", c.potential.a}, {"b", c.potential.b}};
  j["seed"] = c.seed;
  j["rho"] = c.rho;
  j["path_nodes"] = c.pathNodes;
  j["path_iters"] = c.pathIters;
  j["ps_records"] = c.psRecords;
  j["spike_margin"] = c.spikeMargin;
  j["refine_tol"] = c.refineTol;
  return j;
}

Json loadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Config, "cannot parse '" + path + "': " + e.what());
  }
}

ProblemConfig loadConfig(const std::string& path) { return configFromJson(loadJson(path)); }

HilbertPair pairFromJson(const Json& j) {
  int d = get<int>(j, "dim", 0);
  auto e = get<std::vector<double>>(j, "gramE", {});
  auto h = get<std::vector<double>>(j, "gramH", {});
  if (d <= 0 || e.size() != static_cast<size_t>(d) * d || h.size() != e.size())
    throw Error(ErrorKind::Config, "pair JSON needs dim and two dim*dim row-major matrices");
  Mat E(d, d), H(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      E(r, c) = e[r * d + c];
      H(r, c) = h[r * d + c];
    }
  return HilbertPair(E, H);
}

Json toJson(const Vec& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json toJson(const PSRecord& r) {
  Json j;
  j["n"] = r.n;
  j["rho"] = r.rho;
  j["eps_n"] = r.epsN;
  j["zeta"] = r.zeta;
  j["node"] = r.node;
  j["value"] = r.value;
  j["dual_norm"] = r.dualNorm;
  j["dual_norm_limit"] = 3.0 * r.zeta;
  j["morse_count"] = r.morseCount;
  j["lagrange"] = r.lagrange;
  j["norm"] = r.norm;
  j["min_nodal"] = r.minNodal;
  j["accepted"] = r.accepted;
  j["u"] = toJson(r.u);
  return j;
}

Json toJson(const CriticalPointReport& r) {
  Json j;
  j["rho"] = r.rho;
  j["value"] = r.value;
  j["lambda"] = r.lambda;
  j["euler_lagrange_residual"] = r.elResidual;
  j["mass_error"] = r.massError;
  j["morse_index"] = r.morseIndex;
  j["free_morse_index"] = r.freeMorseIndex;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["min_nodal"] = r.minNodal;
  j["max_nodal"] = r.maxNodal;
  j["u"] = toJson(r.u);
  return j;
}

Json toJson(const SweepRow& r) {
  Json j;
  j["rho"] = r.rho;
  j["c_rho"] = r.c;
  j["slope_left"] = r.slopeLeft ? Json(*r.slopeLeft) : Json(nullptr);
  j["slope_right"] = r.slopeRight ? Json(*r.slopeRight) : Json(nullptr);
  j["differentiable"] = r.differentiable;
  j["geometry_ok"] = r.geometryOk;
  j["iterations"] = r.iterations;
  j["perp_residual"] = r.perpResidual;
  return j;
}

Json toJson(const TraceRecord& r) {
  return Json{{"stage", r.stage}, {"node", r.node}, {"phi_before", r.phiBefore}, {"phi_after", r.phiAfter},
              {"displacement", r.displacement}};
}

std::string sweepCsv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "rho,c_rho,slope_left,slope_right,differentiable,geometry_ok\n";
  for (const auto& r : rows) {
    os << formatDouble(r.rho) << ',' << formatDouble(r.c) << ','
       << (r.slopeLeft ? formatDouble(*r.slopeLeft) : "") << ','
       << (r.slopeRight ? formatDouble(*r.slopeRight) : "") << ',' << (r.differentiable ? 1 : 0) << ','
       << (r.geometryOk ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string jsonLines(const std::vector<Json>& docs) {
  std::string out;
  for (const auto& d : docs) out += d.dump() + '\n';
  return out;
}

std::string sha256Hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Config, "SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

void writeText(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write '" + path + "'");
  out << text;
}

std::string readText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Manifest::Manifest(std::string command, Json config, std::uint64_t seed, int threads)
    : command_(std::move(command)), config_(std::move(config)), seed_(seed), threads_(threads) {}

void Manifest::addTiming(const std::string& stage, double seconds) { timing_.emplace_back(stage, seconds); }

void Manifest::emit(const std::string& dir, const std::string& name, const std::string& text) {
  writeText((std::filesystem::path(dir) / name).string(), text);
  files_.push_back(name);
  hashes_[name] = sha256Hex(text);
}

void Manifest::write(const std::string& dir) const {
  Json j;
  j["command"] = command_;
  j["config"] = config_;
  j["seed"] = seed_;
  j["threads"] = threads_;
  j["versions"] = {{"mpsphere", "1.0.0"},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__}};
  Json t = Json::object();
  for (const auto& [k, v] : timing_) t[k] = v;
  j["timing_seconds"] = t;
  Json files = Json::array();
  for (const auto& f : files_) files.push_back({{"file", f}, {"sha256", hashes_.at(f)}});
  j["files"] = files;
  writeText((std::filesystem::path(dir) / "manifest.json").string(), j.dump(2) + "\n");
}

}  // namespace mps
