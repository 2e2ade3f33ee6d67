#include "mpsphere/kernels.hpp"

#include <omp.h>

#include <algorithm>

#include "mpsphere/sphere_geometry.hpp"

namespace mps {

namespace {

template <class Fn>
void forNodes(int first, int last, Exec exec, Fn&& fn) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int j = first; j <= last; ++j) fn(j);
  } else {
    for (int j = first; j <= last; ++j) fn(j);
  }
}

}  // namespace

int threadCount() { return omp_get_max_threads(); }

void setThreadCount(int n) {
  if (n > 0) omp_set_num_threads(n);
}

Vec nodeValues(const ConstrainedFunctional& f, const Mat& nodes, Exec exec) {
  const int m = static_cast<int>(nodes.cols());
  Vec out(m);
  forNodes(0, m - 1, exec, [&](int j) { out(j) = f.value(nodes.col(j)); });
  return out;
}

Mat nodeSphereGradients(const ConstrainedFunctional& f, const HilbertPair& pair, const Mat& nodes, double mu,
                        int first, int last, Exec exec) {
  Mat out = Mat::Zero(nodes.rows(), nodes.cols());
  forNodes(first, last, exec,
           [&](int j) { out.col(j) = sphereGradient(f, pair, SpherePoint{nodes.col(j), mu}); });
  return out;
}

Vec nodeDualNorms(const ConstrainedFunctional& f, const HilbertPair& pair, const Mat& nodes, double mu, Exec exec) {
  const int m = static_cast<int>(nodes.cols());
  Vec out(m);
  forNodes(0, m - 1, exec,
           [&](int j) { out(j) = constrainedDualNorm(f, pair, SpherePoint{nodes.col(j), mu}); });
  return out;
}

std::vector<int> nodeMorseCounts(const ConstrainedFunctional& f, const HilbertPair& pair, const Mat& nodes,
                                 double mu, double theta, const std::vector<int>& which, Exec exec) {
  const int k = static_cast<int>(which.size());
  std::vector<int> out(k, 0);
  forNodes(0, k - 1, exec, [&](int i) {
    out[i] = approxMorseIndex(f, pair, SpherePoint{nodes.col(which[i]), mu}, theta).count;
  });
  return out;
}

double descendNodes(const ConstrainedFunctional& f, const HilbertPair& pair, Mat& nodes, double mu, double step,
                    double cap, int first, int last, Exec exec) {
  if (last < first) return 0.0;
  std::vector<double> taken(nodes.cols(), 0.0);
  forNodes(first, last, exec, [&](int j) {
    SpherePoint p{nodes.col(j), mu};
    Vec g = sphereGradient(f, pair, p);
    double gn = pair.normE(g);
    double s = step;
    if (gn * s > cap) s = cap / gn;
    Vec next = expMap(pair, p, -s * g);
    nodes.col(j) = pair.renormalize(next, mu);
    taken[j] = s * gn;
  });
  return *std::max_element(taken.begin(), taken.end());
}

Vec nodeNormsE(const HilbertPair& pair, const Mat& nodes, Exec exec) {
  const int m = static_cast<int>(nodes.cols());
  Vec out(m);
  forNodes(0, m - 1, exec, [&](int j) { out(j) = pair.normE(nodes.col(j)); });
  return out;
}

}  // namespace mps
