#include <benchmark/benchmark.h>

#include <cmath>

#include "mpsphere/kernels.hpp"
#include "mpsphere/minmax.hpp"
#include "mpsphere/problems.hpp"

using namespace mps;

namespace {

struct Setup {
  ProblemConfig cfg;
  NLSProblem prob;
  Mat nodes;
  explicit Setup(int d) : cfg(config(d)), prob(cfg) {
    auto [w1, w2] = prob.endpoints();
    nodes = geodesicPath(prob.pair(), w1, w2, cfg.mu, 41).nodes;
  }
  static ProblemConfig config(int d) {
    ProblemConfig c;
    c.d = d;
    c.rhoMin = 1.0;
    c.rhoMax = 1.5;
    return c;
  }
};

Setup& setup(int d) {
  static Setup s200(200), s800(800);
  return d == 200 ? s200 : s800;
}

Exec execOf(const benchmark::State& st) { return st.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_NodeValues(benchmark::State& st) {
  Setup& s = setup(static_cast<int>(st.range(0)));
  PhiRho phi = s.prob.family().at(1.2);
  for (auto _ : st) benchmark::DoNotOptimize(nodeValues(phi, s.nodes, execOf(st)));
}

void BM_SphereGradients(benchmark::State& st) {
  Setup& s = setup(static_cast<int>(st.range(0)));
  PhiRho phi = s.prob.family().at(1.2);
  int m = static_cast<int>(s.nodes.cols());
  for (auto _ : st)
    benchmark::DoNotOptimize(nodeSphereGradients(phi, s.prob.pair(), s.nodes, s.cfg.mu, 1, m - 2, execOf(st)));
}

void BM_DualNorms(benchmark::State& st) {
  Setup& s = setup(static_cast<int>(st.range(0)));
  PhiRho phi = s.prob.family().at(1.2);
  for (auto _ : st) benchmark::DoNotOptimize(nodeDualNorms(phi, s.prob.pair(), s.nodes, s.cfg.mu, execOf(st)));
}

void BM_DescendNodes(benchmark::State& st) {
  Setup& s = setup(static_cast<int>(st.range(0)));
  PhiRho phi = s.prob.family().at(1.2);
  int m = static_cast<int>(s.nodes.cols());
  for (auto _ : st) {
    Mat work = s.nodes;
    benchmark::DoNotOptimize(descendNodes(phi, s.prob.pair(), work, s.cfg.mu, 0.05, 0.02, 1, m - 2, execOf(st)));
  }
}

void args(benchmark::internal::Benchmark* b) {
  b->ArgNames({"d", "parallel"});
  for (int d : {200, 800})
    for (int par : {0, 1}) b->Args({d, par});
  b->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(BM_NodeValues)->Apply(args);
BENCHMARK(BM_SphereGradients)->Apply(args);
BENCHMARK(BM_DualNorms)->Apply(args);
BENCHMARK(BM_DescendNodes)->Apply(args);

BENCHMARK_MAIN();
