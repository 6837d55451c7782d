#pragma once

#include "popdyn/analysis.hpp"
#include "popdyn/config.hpp"
#include "popdyn/revision.hpp"
#include "popdyn/simulator.hpp"
#include "popdyn/tuner.hpp"

#include <string>
#include <vector>

namespace popdyn {

// Writes via a temp file in the same directory plus rename, so readers never
// see a partial file.
void write_text_atomic(const std::string& path, const std::string& content);

// Header t,x1..xn,y1..yn,lambda,s_bar,ne_dist,transit_mass; the y columns are
// per-destination transit sums. 12 significant digits.
std::string trajectory_csv(const std::vector<TrajectorySample>& trace, int n);

// Header k,t_k,lambda_k,dot_val,f_val,floored.
std::string update_log_csv(const std::vector<UpdateRecord>& log);

std::string constants_block(const CertifiedConstants& consts);

std::string report_json(const RunReport& report);

// Resolved config plus the certified constants, for reproducing the run.
std::string meta_json(const ExperimentConfig& resolved_config, const CertifiedConstants& consts);

}  // namespace popdyn
