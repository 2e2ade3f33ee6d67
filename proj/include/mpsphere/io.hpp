#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpsphere/minmax.hpp"
#include "mpsphere/problems.hpp"

namespace mps {

using Json = nlohmann::ordered_json;

ProblemConfig configFromJson(const Json& j);
Json configToJson(const ProblemConfig& cfg);
ProblemConfig loadConfig(const std::string& path);
Json loadJson(const std::string& path);

// {dim, gramE, gramH} with row-major matrices.
HilbertPair pairFromJson(const Json& j);

Json toJson(const Vec& v);
Json toJson(const PSRecord& r);
Json toJson(const CriticalPointReport& r);
Json toJson(const SweepRow& r);
Json toJson(const TraceRecord& r);

std::string sweepCsv(const std::vector<SweepRow>& rows);
// One compact JSON document per line.
std::string jsonLines(const std::vector<Json>& docs);

std::string sha256Hex(const std::string& bytes);
void writeText(const std::string& path, const std::string& text);
std::string readText(const std::string& path);

// Run manifest: config snapshot, seed, versions, per-stage timing and hashes of emitted files.
class Manifest {
 public:
  Manifest(std::string command, Json config, std::uint64_t seed, int threads);
  void addTiming(const std::string& stage, double seconds);
  // Writes text to dir/name and records its hash.
  void emit(const std::string& dir, const std::string& name, const std::string& text);
  void write(const std::string& dir) const;
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string command_;
  Json config_;
  std::uint64_t seed_;
  int threads_;
  std::vector<std::pair<std::string, double>> timing_;
  std::vector<std::string> files_;
  std::map<std::string, std::string> hashes_;
};

}  // namespace mps
