#pragma once

#include <vector>

#include "mpsphere/functional.hpp"

namespace mps {

// Node-wise kernels over the columns of a d x m node matrix.  Serial and
// OpenMP variants evaluate the same per-node function, so results agree bit
// for bit.
enum class Exec { Serial, Parallel };

Vec nodeValues(const ConstrainedFunctional& f, const Mat& nodes, Exec exec = Exec::Parallel);

// Columns are sphere gradients; columns outside [first, last] are left zero.
Mat nodeSphereGradients(const ConstrainedFunctional& f, const HilbertPair& pair, const Mat& nodes, double mu,
                        int first, int last, Exec exec = Exec::Parallel);

Vec nodeDualNorms(const ConstrainedFunctional& f, const HilbertPair& pair, const Mat& nodes, double mu,
                  Exec exec = Exec::Parallel);

std::vector<int> nodeMorseCounts(const ConstrainedFunctional& f, const HilbertPair& pair, const Mat& nodes,
                                 double mu, double theta, const std::vector<int>& which, Exec exec = Exec::Parallel);

// One explicit descent step u <- exp_u(-s grad) on columns first..last, with the
// E-norm of each step capped at cap.  Returns the largest step length taken.
double descendNodes(const ConstrainedFunctional& f, const HilbertPair& pair, Mat& nodes, double mu, double step,
                    double cap, int first, int last, Exec exec = Exec::Parallel);

Vec nodeNormsE(const HilbertPair& pair, const Mat& nodes, Exec exec = Exec::Parallel);

int threadCount();
void setThreadCount(int n);

}  // namespace mps
