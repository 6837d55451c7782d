#include "popdyn/tuner.hpp"

#include "popdyn/analysis.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace popdyn;

namespace {

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

const ProtocolParams kQuarter{0.25, 3};

struct Setup {
    GameDefinition game = make_rps_game(1.0, 2.0);
    DelayMatrix delays = make_abs_diff_delays(3);
    CertifiedConstants consts = compute_constants(game, kQuarter, delays, 0.25);
};

RateTuner make_tuner(const Setup& s, bool enabled = true, double lambda0 = 1.0) {
    TunerConfig cfg;
    cfg.delta = 0.25;
    cfg.lambda0 = lambda0;
    cfg.enabled = enabled;
    return RateTuner(cfg, s.consts, kQuarter);
}

}  // namespace

TEST_CASE("condition evaluation") {
    const Setup s;
    const RateTuner tuner = make_tuner(s);

    SUBCASE("equilibrium payoffs deactivate condition 1") {
        const Vec x = v3(1.0 / 3, 1.0 / 3, 1.0 / 3);
        const ConditionReport r = tuner.evaluate_conditions(x, s.game.payoff(x), 1.0);
        CHECK(r.f_val == 0.0);
        CHECK_FALSE(r.cond1);
    }
    SUBCASE("active coupling with zero dissipation satisfies condition 2") {
        // Empty population: the field vanishes while the storage gradient does
        // not, so f > 0 and the dot term is exactly zero.
        const Vec x = v3(0, 0, 0);
        const Vec p = v3(0, 2, -1);
        const ConditionReport r = tuner.evaluate_conditions(x, p, 1.0);
        CHECK(r.f_val > 0.0);
        CHECK(r.dot_val == 0.0);
        CHECK(r.cond1);
        CHECK(r.cond2);
    }
    SUBCASE("boundary of condition 2 counts as satisfied") {
        const Vec x = v3(0.6, 0.2, 0.2);
        const Vec p = s.game.payoff(x);
        const ConditionReport probe = tuner.evaluate_conditions(x, p, 1.0);
        REQUIRE(probe.f_val > 0.0);
        REQUIRE(probe.dot_val < 0.0);
        // Choose lambda_k so that dot + lambda_k f / (1 - delta) is exactly 0.
        const double lambda_boundary = -probe.dot_val * 0.75 / probe.f_val;
        const ConditionReport r = tuner.evaluate_conditions(x, p, lambda_boundary);
        CHECK(r.cond2);
        const ConditionReport below = tuner.evaluate_conditions(x, p, lambda_boundary * 0.999);
        CHECK_FALSE(below.cond2);
    }
}

TEST_CASE("rate proposal") {
    CHECK(RateTuner::propose_rate(-1.0, 1.0) == doctest::Approx(0.5));
    CHECK(RateTuner::propose_rate(0.0, 2.0) == 0.0);
    CHECK_THROWS_AS(RateTuner::propose_rate(-1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(RateTuner::propose_rate(-1.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(RateTuner::propose_rate(0.5, 1.0), std::domain_error);

    // Condition-2 boundary reproduces lambda_k / (2 (1 - delta)).
    const double lambda_k = 0.8, delta = 0.25, f = 3.1;
    const double dot = -lambda_k * f / (1.0 - delta);
    CHECK(RateTuner::propose_rate(dot, f) ==
          doctest::Approx(lambda_k / (2.0 * (1.0 - delta))).epsilon(1e-14));
}

TEST_CASE("spacing constraint blocks early updates") {
    const Setup s;
    Simulator sim(s.game, kQuarter, s.delays, v3(0.6, 0.2, 0.2), 1.0, 1e-2);
    RateTuner tuner = make_tuner(s);
    const double eligible = tuner.config().spacing_factor * 2.0 * s.consts.d_max;
    CHECK(eligible >= 2.0 * s.consts.d_max);
    // Poll every step up to just below the eligibility time: no update may fire.
    while (sim.time() < eligible - 1e-2 - 1e-12) {
        tuner.maybe_update(sim);
        CHECK(tuner.update_count() == 0);
        sim.step();
    }
    CHECK(sim.lambda() == 1.0);
    // The very next poll is eligible and this state satisfies both conditions.
    sim.step();
    tuner.maybe_update(sim);
    REQUIRE(tuner.update_count() == 1);
    CHECK(tuner.update_log()[0].t >= 2.0 * s.consts.d_max - 1e-12);
    CHECK(sim.lambda() < 1.0);
}

TEST_CASE("disabled tuner leaves the rate alone") {
    const Setup s;
    Simulator sim(s.game, kQuarter, s.delays, v3(0.6, 0.2, 0.2), 1.0, 1e-2);
    RateTuner tuner = make_tuner(s, false);
    const auto trace = sim.run(20.0, 10, [&](Simulator& sm) { tuner.maybe_update(sm); });
    CHECK(tuner.update_count() == 0);
    for (const auto& sample : trace) CHECK(sample.lambda == 1.0);
}

TEST_CASE("tuned run: schedule invariants and convergence direction") {
    const Setup s;
    Simulator sim(s.game, kQuarter, s.delays, v3(0.6, 0.2, 0.2), 1.0, 1e-3);
    RateTuner tuner = make_tuner(s);
    const auto trace = sim.run(120.0, 1, [&](Simulator& sm) { tuner.maybe_update(sm); });
    const auto& log = tuner.update_log();
    REQUIRE(log.size() >= 2);

    SUBCASE("rates decrease with the certified ratio and spacing") {
        double prev_lambda = 1.0;
        double prev_t = 0.0;
        for (const UpdateRecord& u : log) {
            CHECK(u.lambda < prev_lambda);
            if (!u.floored)
                CHECK(u.lambda <= prev_lambda / (2.0 * (1.0 - 0.25)) + 1e-12);
            CHECK(u.t - prev_t >= 2.0 * s.consts.d_max - 1e-12);
            prev_lambda = u.lambda;
            prev_t = u.t;
        }
    }

    SUBCASE("conditions held at each recorded update instant") {
        double lambda_before = 1.0;
        for (const UpdateRecord& u : log) {
            const auto it = std::find_if(trace.begin(), trace.end(), [&](const auto& smp) {
                return std::abs(smp.t - u.t) < 1e-12;
            });
            REQUIRE(it != trace.end());
            CHECK(it->lambda == lambda_before);  // sample predates the switch
            const ConditionReport r = tuner.evaluate_conditions(it->x, it->p, lambda_before);
            CHECK(r.cond1);
            CHECK(r.cond2);
            lambda_before = u.lambda;
        }
    }

    SUBCASE("trajectory heads toward the equilibrium") {
        CHECK(trace.back().ne_dist < trace.front().ne_dist);
        CHECK(trace.back().lambda < 1.0);
    }

    SUBCASE("storage envelope holds between updates") {
        const BoundViolations v = verify_certificates(trace, log, s.consts, kQuarter);
        CHECK(v.envelope_checked > 0);
        CHECK(v.envelope == 0);
        CHECK(v.x_rate == 0);
        CHECK(v.y_rate == 0);
    }
}

TEST_CASE("tuner config validation") {
    const Setup s;
    TunerConfig cfg;
    cfg.delta = 0.5;
    CHECK_THROWS_AS(RateTuner(cfg, s.consts, kQuarter), std::invalid_argument);
    cfg.delta = 0.25;
    cfg.lambda0 = 0.0;
    CHECK_THROWS_AS(RateTuner(cfg, s.consts, kQuarter), std::invalid_argument);
}
