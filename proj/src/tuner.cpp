#include "popdyn/tuner.hpp"

#include <algorithm>
#include <stdexcept>

namespace popdyn {

RateTuner::RateTuner(TunerConfig config, CertifiedConstants consts, ProtocolParams params)
    : config_(config), consts_(std::move(consts)), params_(params), lambda_k_(config.lambda0) {
    if (!(config.delta > 0.0 && config.delta < 0.5))
        throw std::invalid_argument("tuner: delta must lie in (0, 1/2)");
    if (config.lambda0 <= 0.0) throw std::invalid_argument("tuner: lambda0 must be positive");
}

ConditionReport RateTuner::evaluate_conditions(const Vec& x, const Vec& p,
                                               double lambda_k) const {
    ConditionReport r;
    r.f_val = coupling_f(x, p, params_, consts_);
    r.dot_val = grad_x_storage(x, p, params_).dot(edm_field(x, p, params_));
    r.cond1 = r.f_val > config_.f_tol;
    r.cond2 = r.dot_val + lambda_k * r.f_val / (1.0 - config_.delta) >= 0.0;
    return r;
}

double RateTuner::propose_rate(double dot_val, double f_val) {
    if (f_val <= 0.0) throw std::invalid_argument("propose_rate: f must be positive");
    if (dot_val > 0.0)
        throw std::domain_error("propose_rate: positive storage dissipation (numeric anomaly)");
    return -dot_val / (2.0 * f_val);
}

void RateTuner::maybe_update(Simulator& sim) {
    if (!config_.enabled) return;
    const double t = sim.time();
    const double d_max = consts_.d_max;
    if (t + 1e-12 < t_k_ + config_.spacing_factor * 2.0 * d_max) return;

    ConditionReport r = evaluate_conditions(sim.x(), sim.payoff(), lambda_k_);
    if (!(r.cond1 && r.cond2)) {
        // The algorithm may simply never fire again; the dynamics still converge.
        if (d_max > 0.0 && t - t_k_ >= config_.dwell_factor * d_max) terminated_ = true;
        return;
    }

    // The dissipation term is <= 0 in exact arithmetic; absorb summation noise.
    double dot = r.dot_val;
    if (dot > 0.0 && dot < 1e-15) dot = 0.0;
    const double proposal = propose_rate(dot, r.f_val);

    // The bound minimizer is admissible but far too conservative in practice:
    // the certified M makes f two orders above the realized coupling, so the
    // raw proposal freezes the dynamics in one jump. Any value up to
    // lambda_k / (2 (1 - delta)) keeps the decrease certificate (condition 2
    // bounds the minimizer by exactly that), so take the top of the interval.
    const double ceiling = lambda_k_ / (2.0 * (1.0 - config_.delta));
    double next = std::max(proposal, ceiling);
    bool floored = false;
    if (next < config_.lambda_floor) {
        if (lambda_k_ <= config_.lambda_floor) return;  // cannot decrease further
        next = config_.lambda_floor;
        floored = true;
    }

    lambda_k_ = next;
    t_k_ = t;
    terminated_ = false;
    log_.push_back({static_cast<int>(log_.size()) + 1, t, next, r.dot_val, r.f_val, floored});
    sim.set_lambda(next);
}

}  // namespace popdyn
