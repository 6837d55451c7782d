#pragma once

#include "popdyn/delays.hpp"
#include "popdyn/game.hpp"
#include "popdyn/history.hpp"
#include "popdyn/revision.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace popdyn {

enum class Scheme { kEuler, kHeun };

struct TrajectorySample {
    double t = 0.0;
    Vec x;
    Vec p;
    Mat y;
    double lambda = 0.0;
    double s_bar = 0.0;
    double ne_dist = 0.0;
    double transit_mass = 0.0;
};

// Integrates the coupled delayed dynamics for the in-game state x and the
// in-transit matrix y. Agents deciding to switch j -> i leave x_j immediately
// and rejoin x_i after d(j, i); the delayed inflow is read from the history
// buffer and is absent while t < d(j, i).
class Simulator {
public:
    Simulator(GameDefinition game, ProtocolParams params, DelayMatrix delays, const Vec& x0,
              double lambda0, double h, Scheme scheme = Scheme::kEuler);

    // Advances one step of size h. Throws NumericalError when the state leaves
    // the realm of finite numbers.
    void step();

    // Steps until t >= horizon. The observer runs once per step, before the
    // state advances, and may change the rate. Samples are recorded every
    // `output_stride` steps (0 picks the default), plus the initial and final
    // states.
    using Observer = std::function<void(Simulator&)>;
    std::vector<TrajectorySample> run(double horizon, int output_stride = 0,
                                      const Observer& observer = nullptr);

    double time() const { return static_cast<double>(step_count_) * h_; }
    double step_size() const { return h_; }
    const Vec& x() const { return x_; }
    const Vec& payoff() const { return p_; }
    const Mat& y() const { return y_; }
    double lambda() const { return lambda_; }
    const GameDefinition& game() const { return game_; }
    const ProtocolParams& params() const { return params_; }
    const DelayMatrix& delays() const { return delays_; }

    // Total mass removed by the non-negativity clip; stays at rounding scale
    // for healthy runs.
    double clipped_mass() const { return clipped_; }

    // Switches the revision rate at the current instant (right-continuous: the
    // stored history sample for the current time gets the new rate).
    void set_lambda(double lambda);

    TrajectorySample sample() const;

    static int default_output_stride(double h);
    static double default_step(const DelayMatrix& delays);

private:
    // t_step is the start of the step being integrated (it decides which
    // delayed pairs are active); t_stage is this stage's evaluation time.
    void derivatives(double t_step, double t_stage, const Vec& x, const Vec& p, double lambda,
                     Vec& dx, Mat& dy) const;
    void clip_negative();

    GameDefinition game_;
    ProtocolParams params_;
    DelayMatrix delays_;
    double h_;
    Scheme scheme_;

    long long step_count_ = 0;
    Vec x_;
    Vec p_;
    Mat y_;
    double lambda_;
    double clipped_ = 0.0;
    HistoryBuffer history_;

    // Distinct positive delays grouped with their (from, to) pairs; one history
    // lookup per group per derivative evaluation.
    struct DelayGroup {
        double d;
        std::vector<std::pair<int, int>> pairs;
    };
    std::vector<DelayGroup> delay_groups_;
    std::vector<std::pair<int, int>> immediate_pairs_;  // off-diagonal pairs with zero delay
};

// Undelayed Smith dynamics dx/dt = lambda * V(x, p); the oracle the delayed
// integrator collapses to when every delay is zero.
std::vector<TrajectorySample> run_baseline_edm(const GameDefinition& game,
                                               const ProtocolParams& params, const Vec& x0,
                                               double lambda, double h, double horizon,
                                               int output_stride = 0,
                                               Scheme scheme = Scheme::kEuler);

}  // namespace popdyn
