#pragma once

#include "popdyn/revision.hpp"
#include "popdyn/simulator.hpp"

#include <vector>

namespace popdyn {

struct TunerConfig {
    double delta = 0.25;   // must satisfy 0 < delta < 1/2
    double lambda0 = 1.0;
    bool enabled = true;
    // "f > 0" gate evaluated with a strictness proxy; near equilibrium f
    // underflows and a noise-triggered update would crash the rate.
    double f_tol = 1e-12;
    // Proposals below this keep the finite-horizon run alive instead of
    // freezing the dynamics; such updates are flagged.
    double lambda_floor = 1e-8;
    // Dwell (in units of d_max) after which the no-more-updates flag is set.
    double dwell_factor = 50.0;
    // Updates wait spacing_factor * 2 d_max after the previous one. The
    // admissible ratio caps the summed rates at 3 lambda0, so the spacing sets
    // how much integrated rate a finite run gets to dissipate with.
    double spacing_factor = 8.0;
};

struct UpdateRecord {
    int k = 0;
    double t = 0.0;
    double lambda = 0.0;
    double dot_val = 0.0;
    double f_val = 0.0;
    bool floored = false;
};

struct ConditionReport {
    bool cond1 = false;
    bool cond2 = false;
    double f_val = 0.0;
    double dot_val = 0.0;
};

// Online revision-rate tuning: at instants spaced at least 2 d_max apart, if the
// delay coupling f is active and the dissipation no longer dominates it, lower
// the rate to the minimizer of the storage-derivative bound. Generates a
// strictly decreasing rate sequence with lambda_{k+1} <= lambda_k / (2(1-delta)).
class RateTuner {
public:
    RateTuner(TunerConfig config, CertifiedConstants consts, ProtocolParams params);

    ConditionReport evaluate_conditions(const Vec& x, const Vec& p, double lambda_k) const;

    // -dot_val / (2 f_val); requires f_val > 0 and dot_val <= 0.
    static double propose_rate(double dot_val, double f_val);

    // Observer body: enforces the 2 d_max spacing, checks the two gating
    // conditions, and applies the rate switch to the simulator.
    void maybe_update(Simulator& sim);

    const std::vector<UpdateRecord>& update_log() const { return log_; }
    const TunerConfig& config() const { return config_; }
    int update_count() const { return static_cast<int>(log_.size()); }
    double current_lambda() const { return lambda_k_; }
    double last_update_time() const { return t_k_; }
    bool terminated() const { return terminated_; }

private:
    TunerConfig config_;
    CertifiedConstants consts_;
    ProtocolParams params_;
    double lambda_k_;
    double t_k_ = 0.0;
    bool terminated_ = false;
    std::vector<UpdateRecord> log_;
};

}  // namespace popdyn
