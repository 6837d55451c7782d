#include "popdyn/simulator.hpp"

#include "popdyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popdyn {

namespace {

inline double pos(double v) { return v > 0.0 ? v : 0.0; }

std::size_t history_capacity(double d_max, double h) {
    const auto span = static_cast<std::size_t>(std::ceil(d_max / h));
    return span + 4;
}

}  // namespace

Simulator::Simulator(GameDefinition game, ProtocolParams params, DelayMatrix delays,
                     const Vec& x0, double lambda0, double h, Scheme scheme)
    : game_(std::move(game)),
      params_(params),
      delays_(std::move(delays)),
      h_(h),
      scheme_(scheme),
      history_(h > 0 ? h : 1.0, params.n, h > 0 ? history_capacity(delays_.max_delay(), h) : 1) {
    if (h <= 0.0) throw std::invalid_argument("simulator: step size must be positive");
    if (lambda0 <= 0.0) throw std::invalid_argument("simulator: lambda0 must be positive");
    if (!in_simplex(x0)) throw std::invalid_argument("simulator: x0 must lie in the simplex");
    if (delays_.n() != params_.n || game_.n != params_.n)
        throw std::invalid_argument("simulator: dimension mismatch");

    x_ = x0;
    p_ = game_.payoff(x_);
    y_ = Mat::Zero(params_.n, params_.n);
    lambda_ = lambda0;
    history_.push(x_, p_, lambda_);

    for (int j = 0; j < params_.n; ++j) {
        for (int i = 0; i < params_.n; ++i) {
            if (i == j) continue;
            const double d = delays_.d(j, i);
            if (d == 0.0) {
                immediate_pairs_.emplace_back(j, i);
                continue;
            }
            auto it = std::find_if(delay_groups_.begin(), delay_groups_.end(),
                                   [d](const DelayGroup& g) { return g.d == d; });
            if (it == delay_groups_.end()) {
                delay_groups_.push_back({d, {}});
                it = std::prev(delay_groups_.end());
            }
            it->pairs.emplace_back(j, i);
        }
    }
}

void Simulator::derivatives(double t_step, double t_stage, const Vec& x, const Vec& p,
                            double lambda, Vec& dx, Mat& dy) const {
    const int n = params_.n;
    dx.setZero(n);
    dy.setZero(n, n);

    // Decision rates at the stage time: mass leaving j toward i.
    for (int i = 0; i < n; ++i) {
        double outrate = 0.0;
        for (int j = 0; j < n; ++j) outrate += params_.rho * pos(p(j) - p(i));
        dx(i) -= lambda * x(i) * outrate;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            dy(i, j) += lambda * x(i) * params_.rho * pos(p(j) - p(i));
        }
    }

    // Zero-delay pairs complete instantly: the same rate reenters the game.
    for (const auto& [j, i] : immediate_pairs_) {
        const double rate = lambda * x(j) * params_.rho * pos(p(i) - p(j));
        dx(i) += rate;
        dy(j, i) -= rate;
    }

    // Delayed completions: decisions taken at t - d conclude now. Nothing
    // completes while t < d (transit only fills); a pair activates for the
    // whole step whose start has reached its delay, which keeps the switch-on
    // aligned with the grid for both stages of a step.
    Vec xd(n), pd(n);
    double lambda_d = 0.0;
    for (const DelayGroup& group : delay_groups_) {
        if (t_step - group.d < -1e-9) continue;
        const double t_past = std::max(t_stage - group.d, 0.0);
        history_.lookup(t_past, xd, pd, lambda_d);
        for (const auto& [j, i] : group.pairs) {
            const double rate = lambda_d * xd(j) * params_.rho * pos(pd(i) - pd(j));
            dx(i) += rate;
            dy(j, i) -= rate;
        }
    }
}

void Simulator::clip_negative() {
    const int n = params_.n;
    for (int i = 0; i < n; ++i) {
        if (x_(i) < 0.0) {
            clipped_ += -x_(i);
            x_(i) = 0.0;
        }
        for (int j = 0; j < n; ++j) {
            if (y_(j, i) < 0.0) {
                clipped_ += -y_(j, i);
                y_(j, i) = 0.0;
            }
        }
    }
}

void Simulator::step() {
    const double t = time();
    const int n = params_.n;
    Vec dx1(n), dx2(n);
    Mat dy1(n, n), dy2(n, n);

    derivatives(t, t, x_, p_, lambda_, dx1, dy1);
    if (scheme_ == Scheme::kEuler) {
        x_ += h_ * dx1;
        y_ += h_ * dy1;
    } else {
        const Vec xs = x_ + h_ * dx1;
        const Vec ps = game_.payoff(xs);
        derivatives(t, t + h_, xs, ps, lambda_, dx2, dy2);
        x_ += 0.5 * h_ * (dx1 + dx2);
        y_ += 0.5 * h_ * (dy1 + dy2);
    }

    ++step_count_;
    clip_negative();
    if (!x_.allFinite() || !y_.allFinite())
        throw NumericalError("simulator: non-finite state", t);
    p_ = game_.payoff(x_);
    history_.push(x_, p_, lambda_);
}

std::vector<TrajectorySample> Simulator::run(double horizon, int output_stride,
                                             const Observer& observer) {
    if (horizon < 0.0) throw std::invalid_argument("run: horizon must be >= 0");
    const int stride = output_stride > 0 ? output_stride : default_output_stride(h_);
    std::vector<TrajectorySample> trace;
    trace.push_back(sample());
    while (time() < horizon - 1e-12) {
        if (observer) observer(*this);
        step();
        if (step_count_ % stride == 0 || time() >= horizon - 1e-12) trace.push_back(sample());
    }
    return trace;
}

void Simulator::set_lambda(double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("set_lambda: rate must be positive");
    lambda_ = lambda;
    history_.set_current_lambda(lambda);
}

TrajectorySample Simulator::sample() const {
    TrajectorySample s;
    s.t = time();
    s.x = x_;
    s.p = p_;
    s.y = y_;
    s.lambda = lambda_;
    s.s_bar = storage(x_, p_, params_);
    s.ne_dist = game_.ne_set.empty() ? ne_residual(game_, x_) : nash_distance(game_, x_);
    s.transit_mass = y_.sum();
    return s;
}

int Simulator::default_output_stride(double h) {
    return std::max(1, static_cast<int>(std::lround(0.05 / h)));
}

double Simulator::default_step(const DelayMatrix& delays) {
    const double dmin = delays.min_positive();
    return std::isfinite(dmin) ? std::min(1e-2, dmin / 50.0) : 1e-2;
}

std::vector<TrajectorySample> run_baseline_edm(const GameDefinition& game,
                                               const ProtocolParams& params, const Vec& x0,
                                               double lambda, double h, double horizon,
                                               int output_stride, Scheme scheme) {
    if (h <= 0.0) throw std::invalid_argument("baseline: step size must be positive");
    if (!in_simplex(x0)) throw std::invalid_argument("baseline: x0 must lie in the simplex");
    const int stride = output_stride > 0 ? output_stride : Simulator::default_output_stride(h);
    const int n = params.n;

    Vec x = x0;
    Vec p = game.payoff(x);
    const Mat y0 = Mat::Zero(n, n);
    long long k = 0;

    auto make_sample = [&](double t) {
        TrajectorySample s;
        s.t = t;
        s.x = x;
        s.p = p;
        s.y = y0;
        s.lambda = lambda;
        s.s_bar = storage(x, p, params);
        s.ne_dist = game.ne_set.empty() ? ne_residual(game, x) : nash_distance(game, x);
        s.transit_mass = 0.0;
        return s;
    };

    std::vector<TrajectorySample> trace;
    trace.push_back(make_sample(0.0));
    while (k * h < horizon - 1e-12) {
        const Vec dx1 = lambda * edm_field(x, p, params);
        if (scheme == Scheme::kEuler) {
            x += h * dx1;
        } else {
            const Vec xs = x + h * dx1;
            const Vec dx2 = lambda * edm_field(xs, game.payoff(xs), params);
            x += 0.5 * h * (dx1 + dx2);
        }
        ++k;
        if (!x.allFinite()) throw NumericalError("baseline: non-finite state", (k - 1) * h);
        p = game.payoff(x);
        const double t = k * h;
        if (k % stride == 0 || t >= horizon - 1e-12) trace.push_back(make_sample(t));
    }
    return trace;
}

}  // namespace popdyn
