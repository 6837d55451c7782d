#pragma once

#include "popdyn/analysis.hpp"
#include "popdyn/config.hpp"
#include "popdyn/simulator.hpp"
#include "popdyn/tuner.hpp"

#include <vector>

namespace popdyn {

struct RunResult {
    std::vector<TrajectorySample> trace;
    std::vector<UpdateRecord> update_log;
    RunReport report;
};

// Runs one resolved experiment end to end: delayed integration with the tuner
// attached (when enabled) and the certificate monitor covering every step.
RunResult run_experiment(const ResolvedExperiment& exp, double tail_fraction = 0.5);

// As above but from an explicit initial state (used by sweeps over x0).
RunResult run_experiment_from(const ResolvedExperiment& exp, const Vec& x0,
                              double tail_fraction = 0.5);

}  // namespace popdyn
