#include "popdyn/runner.hpp"

namespace popdyn {

RunResult run_experiment_from(const ResolvedExperiment& exp, const Vec& x0,
                              double tail_fraction) {
    Simulator sim(exp.game, exp.params, exp.delays, x0, exp.config.lambda0, exp.h, exp.scheme);
    TunerConfig tuner_cfg;
    tuner_cfg.delta = exp.config.delta;
    tuner_cfg.lambda0 = exp.config.lambda0;
    tuner_cfg.enabled = exp.config.tuner;
    RateTuner tuner(tuner_cfg, exp.consts, exp.params);
    CertificateMonitor monitor(exp.consts, exp.params);

    auto observer = [&](Simulator& s) {
        tuner.maybe_update(s);  // rate switches must precede the monitor
        monitor.observe(s);
    };

    RunResult result;
    result.trace = sim.run(exp.config.horizon, exp.stride, observer);
    monitor.observe(sim);  // final state

    result.update_log = tuner.update_log();
    result.report = summarize_run(result.trace, tail_fraction, exp.config.thresholds);
    result.report.bound_violations = monitor.violations();
    result.report.update_count = tuner.update_count();
    result.report.clipped_mass = sim.clipped_mass();
    result.report.max_mass_error = monitor.max_mass_error();
    result.report.tuner_terminated = tuner.terminated();
    return result;
}

RunResult run_experiment(const ResolvedExperiment& exp, double tail_fraction) {
    return run_experiment_from(exp, exp.config.x0, tail_fraction);
}

}  // namespace popdyn
