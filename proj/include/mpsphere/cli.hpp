#pragma once

namespace mps {

// Entry point for the mpsphere executable; returns the process exit code.
int runCli(int argc, char** argv);

}  // namespace mps

#include <vector>

#include "mpsphere/minmax.hpp"
#include "mpsphere/problems.hpp"
#include "mpsphere/suite.hpp"

namespace mps {

// Acceptance-style checks over a finished solve: records, limit report, sweep and the constant oracle.
std::vector<SuiteCheck> solveChecks(const SolveReport& report, const NLSProblem& problem);

}  // namespace mps
