#include "popdyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace popdyn {

namespace {

constexpr double kTimeSlack = 1e-12;

bool rate_constant_window(const std::vector<UpdateRecord>& log, double from, double to) {
    for (const UpdateRecord& u : log)
        if (u.t > from + 1e-9 && u.t <= to + 1e-9) return false;
    return true;
}

}  // namespace

OscillationMetrics oscillation_metrics(const std::vector<TrajectorySample>& trace,
                                       double tail_fraction) {
    if (trace.empty()) throw std::invalid_argument("oscillation_metrics: empty trace");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
        throw std::invalid_argument("oscillation_metrics: tail_fraction in (0, 1]");
    const double t_end = trace.back().t;
    const double t_from = t_end - tail_fraction * (t_end - trace.front().t);

    OscillationMetrics m;
    double sum = 0.0;
    std::size_t count = 0;
    for (const TrajectorySample& s : trace) {
        if (s.t < t_from - kTimeSlack) continue;
        m.amplitude = std::max(m.amplitude, s.ne_dist);
        sum += s.transit_mass;
        ++count;
    }
    m.mean_transit = count ? sum / count : 0.0;
    return m;
}

BoundViolations verify_certificates(const std::vector<TrajectorySample>& trace,
                                    const std::vector<UpdateRecord>& update_log,
                                    const CertifiedConstants& consts,
                                    const ProtocolParams& params, double tol,
                                    bool check_delta_passivity) {
    BoundViolations v;
    const double d_max = consts.d_max;

    for (std::size_t m = 0; m + 1 < trace.size(); ++m) {
        const TrajectorySample& a = trace[m];
        const TrajectorySample& b = trace[m + 1];
        const double dt = b.t - a.t;
        if (dt <= 0.0) continue;
        if (a.t < d_max - kTimeSlack) continue;
        if (!rate_constant_window(update_log, a.t - d_max, b.t)) continue;

        const double x_rate = (b.x - a.x).norm() / dt;
        ++v.x_checked;
        if (x_rate > consts.N * a.lambda + tol) ++v.x_rate;

        const Vec ycols_a = a.y.colwise().sum();
        const Vec ycols_b = b.y.colwise().sum();
        const double y_rate = (ycols_b - ycols_a).norm() / dt;
        ++v.y_checked;
        if (y_rate > consts.M * a.lambda * a.lambda + tol) ++v.y_rate;
    }

    // Storage envelope between consecutive updates: on [t_{k+1}, t_{k+2}) the
    // storage stays below epsilon_bar(lambda_k), k >= 1. The tail after the
    // last update extends its interval.
    const std::size_t n_updates = update_log.size();
    for (std::size_t i = 1; i < n_updates; ++i) {
        const double lo = update_log[i].t;
        const double hi =
            i + 1 < n_updates ? update_log[i + 1].t : std::numeric_limits<double>::infinity();
        const double bound = epsilon_bar(update_log[i - 1].lambda, consts, params.n);
        for (const TrajectorySample& s : trace) {
            if (s.t < lo - kTimeSlack || s.t >= hi - kTimeSlack) continue;
            ++v.envelope_checked;
            if (!(s.s_bar < bound + tol)) ++v.envelope;
        }
    }

    for (const TrajectorySample& s : trace) {
        const double dot = grad_x_storage(s.x, s.p, params).dot(edm_field(s.x, s.p, params));
        if (dot > 1e-12) ++v.passivity;
    }

    if (check_delta_passivity && trace.size() >= 2) {
        // S(t) - S(t0) <= int dx/dt . dp/dt dtau, trapezoid over samples with
        // forward-difference derivatives (backward at the last sample).
        const std::size_t m_count = trace.size();
        std::vector<double> g(m_count, 0.0);
        for (std::size_t m = 0; m < m_count; ++m) {
            const std::size_t lo = m + 1 < m_count ? m : m - 1;
            const double dt = trace[lo + 1].t - trace[lo].t;
            if (dt <= 0.0) continue;
            const Vec xdot = (trace[lo + 1].x - trace[lo].x) / dt;
            const Vec pdot = (trace[lo + 1].p - trace[lo].p) / dt;
            g[m] = xdot.dot(pdot);
        }
        double integral = 0.0;
        const double s0 = trace[0].lambda * trace[0].s_bar;
        for (std::size_t m = 1; m < m_count; ++m) {
            integral += 0.5 * (g[m - 1] + g[m]) * (trace[m].t - trace[m - 1].t);
            const double s_here = trace[m].lambda * trace[m].s_bar;
            if (s_here - s0 > integral + 1e-4) ++v.delta_passivity;
        }
    }

    return v;
}

CertificateMonitor::CertificateMonitor(CertifiedConstants consts, ProtocolParams params,
                                       double tol)
    : consts_(std::move(consts)), params_(params), tol_(tol) {}

void CertificateMonitor::observe(Simulator& sim) {
    const double t = sim.time();
    const Vec& x = sim.x();
    const Vec& p = sim.payoff();
    const double lambda = sim.lambda();
    const Vec ycols = sim.y().colwise().sum();
    const double d_max = consts_.d_max;

    max_mass_error_ = std::max(max_mass_error_, std::abs(x.sum() + sim.y().sum() - 1.0));

    const double dot = grad_x_storage(x, p, params_).dot(edm_field(x, p, params_));
    if (dot > pointwise_tol_) ++violations_.passivity;

    if (prev_valid_ && t > prev_t_) {
        const double dt = t - prev_t_;
        if (prev_t_ >= d_max - kTimeSlack && prev_t_ - d_max >= last_switch_t_ - 1e-9 &&
            lambda == prev_lambda_) {
            ++violations_.x_checked;
            if ((x - prev_x_).norm() / dt > consts_.N * prev_lambda_ + tol_) ++violations_.x_rate;
            ++violations_.y_checked;
            if ((ycols - prev_ycols_).norm() / dt > consts_.M * prev_lambda_ * prev_lambda_ + tol_)
                ++violations_.y_rate;
        }
    }

    if (prev_valid_ && lambda != prev_lambda_) {
        rate_before_switch_ = prev_lambda_;
        last_switch_t_ = t;
        ++switch_count_;
    }

    if (switch_count_ >= 2) {
        const double bound = epsilon_bar(rate_before_switch_, consts_, params_.n);
        ++violations_.envelope_checked;
        if (!(storage(x, p, params_) < bound + tol_)) ++violations_.envelope;
    }

    prev_valid_ = true;
    prev_t_ = t;
    prev_x_ = x;
    prev_ycols_ = ycols;
    prev_lambda_ = lambda;
}

RunReport summarize_run(const std::vector<TrajectorySample>& trace, double tail_fraction,
                        const RunThresholds& thresholds) {
    if (trace.empty()) throw std::invalid_argument("summarize_run: empty trace");
    RunReport r;
    r.final_ne_dist = trace.back().ne_dist;
    r.final_transit_mass = trace.back().transit_mass;
    const OscillationMetrics m = oscillation_metrics(trace, tail_fraction);
    r.osc_amplitude = m.amplitude;
    r.mean_transit_mass_tail = m.mean_transit;
    r.converged = r.final_ne_dist <= thresholds.ne_dist &&
                  r.final_transit_mass <= thresholds.transit_mass;
    return r;
}

std::vector<std::size_t> compare_order(const std::vector<RunReport>& reports) {
    std::vector<std::size_t> order(reports.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return reports[a].final_ne_dist < reports[b].final_ne_dist;
    });
    return order;
}

std::string comparison_table(const std::vector<RunReport>& reports,
                             const std::vector<std::string>& labels) {
    if (reports.size() != labels.size())
        throw std::invalid_argument("comparison_table: label count mismatch");
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %12s %12s %12s %12s %8s %10s\n", "run",
                  "ne_dist", "transit", "amplitude", "mean_trans", "updates", "converged");
    out << line;
    for (std::size_t idx : compare_order(reports)) {
        const RunReport& r = reports[idx];
        std::snprintf(line, sizeof(line), "%-20s %12.4e %12.4e %12.4e %12.4e %8d %10s\n",
                      labels[idx].c_str(), r.final_ne_dist, r.final_transit_mass,
                      r.osc_amplitude, r.mean_transit_mass_tail, r.update_count,
                      r.converged ? "yes" : "no");
        out << line;
    }
    return out.str();
}

}  // namespace popdyn
