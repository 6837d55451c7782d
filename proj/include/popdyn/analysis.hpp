#pragma once

#include "popdyn/revision.hpp"
#include "popdyn/simulator.hpp"
#include "popdyn/tuner.hpp"

#include <string>
#include <vector>

namespace popdyn {

struct OscillationMetrics {
    double amplitude = 0.0;     // sup of ne_dist over the tail window
    double mean_transit = 0.0;  // mean transit mass over the same window
};

OscillationMetrics oscillation_metrics(const std::vector<TrajectorySample>& trace,
                                       double tail_fraction);

struct BoundViolations {
    long long x_rate = 0;           // ||dx/dt|| exceeds N lambda
    long long y_rate = 0;           // ||dy/dt|| exceeds M lambda^2
    long long envelope = 0;         // storage at or above the between-update envelope
    long long passivity = 0;        // grad_x S . V above zero
    long long delta_passivity = 0;  // integral dissipation inequality (delay-free runs)
    long long x_checked = 0;
    long long y_checked = 0;
    long long envelope_checked = 0;

    long long total() const { return x_rate + y_rate + envelope + passivity + delta_passivity; }
};

// Post-hoc certificate verification on a recorded trace. Rate checks use
// forward differences of consecutive samples and skip windows where the
// revision rate switched less than d_max earlier. The envelope check needs at
// least two logged updates. The integral dissipation check only applies to
// delay-free traces and is off by default.
BoundViolations verify_certificates(const std::vector<TrajectorySample>& trace,
                                    const std::vector<UpdateRecord>& update_log,
                                    const CertifiedConstants& consts,
                                    const ProtocolParams& params, double tol = 1e-6,
                                    bool check_delta_passivity = false);

// Running version of the same checks, attached as an observer so every
// integration step is covered without retaining the full trace. Call observe()
// once more after the run for the final state. When combined with a tuner, the
// tuner must run first in the composite observer so rate switches are seen at
// their exact instant.
class CertificateMonitor {
public:
    CertificateMonitor(CertifiedConstants consts, ProtocolParams params, double tol = 1e-6);

    void observe(Simulator& sim);

    const BoundViolations& violations() const { return violations_; }
    double max_mass_error() const { return max_mass_error_; }

private:
    CertifiedConstants consts_;
    ProtocolParams params_;
    double tol_;
    double pointwise_tol_ = 1e-12;

    BoundViolations violations_;
    double max_mass_error_ = 0.0;

    bool prev_valid_ = false;
    double prev_t_ = 0.0;
    Vec prev_x_;
    Vec prev_ycols_;
    double prev_lambda_ = 0.0;

    double last_switch_t_ = 0.0;
    double rate_before_switch_ = 0.0;  // lambda_k while t sits in [t_{k+1}, t_{k+2})
    int switch_count_ = 0;
};

struct RunThresholds {
    double ne_dist = 1e-2;
    double transit_mass = 1e-2;
};

struct RunReport {
    double final_ne_dist = 0.0;
    double final_transit_mass = 0.0;
    double osc_amplitude = 0.0;
    double mean_transit_mass_tail = 0.0;
    BoundViolations bound_violations;
    int update_count = 0;
    bool converged = false;
    double clipped_mass = 0.0;
    double max_mass_error = 0.0;
    bool tuner_terminated = false;
};

// Metrics over the trace tail; callers fill in the monitor/tuner fields.
RunReport summarize_run(const std::vector<TrajectorySample>& trace, double tail_fraction,
                        const RunThresholds& thresholds);

// Indices of `reports` ordered by final distance to equilibrium (stable).
std::vector<std::size_t> compare_order(const std::vector<RunReport>& reports);

// Plain-text comparison table, one row per run, sorted by final_ne_dist.
std::string comparison_table(const std::vector<RunReport>& reports,
                             const std::vector<std::string>& labels);

}  // namespace popdyn
