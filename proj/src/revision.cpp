#include "popdyn/revision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace popdyn {

namespace {

inline double pos(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

double switch_rate(const Vec& p, int i, int j, const ProtocolParams& params) {
    if (i < 0 || j < 0 || i >= p.size() || j >= p.size())
        throw std::out_of_range("switch_rate: strategy index out of range");
    return params.rho * pos(p(j) - p(i));
}

RhoCalibration max_valid_rho(const GameDefinition& game, int grid_resolution) {
    if (grid_resolution < 2) throw std::invalid_argument("max_valid_rho: grid_resolution >= 2");
    double worst_sum = 0.0;
    double worst_pair = 0.0;
    for_each_grid_point(game.n, grid_resolution, [&](const Vec& x) {
        const Vec p = game.payoff(x);
        for (int i = 0; i < game.n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < game.n; ++j) {
                const double gap = pos(p(j) - p(i));
                sum += gap;
                worst_pair = std::max(worst_pair, gap);
            }
            worst_sum = std::max(worst_sum, sum);
        }
    });
    RhoCalibration cal;
    cal.worst_gap_sum = worst_sum;
    const double binding = std::max(worst_sum, worst_pair);
    if (binding <= 0.0) {
        cal.rho = std::numeric_limits<double>::infinity();
        cal.any_rho_valid = true;
    } else {
        cal.rho = 1.0 / binding;
    }
    return cal;
}

Vec edm_field(const Vec& x, const Vec& p, const ProtocolParams& params) {
    const int n = params.n;
    if (x.size() != n || p.size() != n) throw std::invalid_argument("edm_field: dimension mismatch");
    Vec v(n);
    for (int i = 0; i < n; ++i) {
        double inflow = 0.0;
        double outrate = 0.0;
        for (int j = 0; j < n; ++j) {
            inflow += x(j) * params.rho * pos(p(i) - p(j));
            outrate += params.rho * pos(p(j) - p(i));
        }
        v(i) = inflow - x(i) * outrate;
    }
    return v;
}

double storage(const Vec& x, const Vec& p, const ProtocolParams& params) {
    const int n = params.n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            const double g = pos(p(j) - p(i));
            row += params.rho * g * g;
        }
        s += x(i) * row;
    }
    return 0.5 * s;
}

Vec grad_x_storage(const Vec&, const Vec& p, const ProtocolParams& params) {
    const int n = params.n;
    Vec g(n);
    for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double gap = pos(p(j) - p(k));
            sum += params.rho * gap * gap;
        }
        g(k) = 0.5 * sum;
    }
    return g;
}

Vec grad_p_storage(const Vec& x, const Vec& p, const ProtocolParams& params) {
    return edm_field(x, p, params);
}

double coupling_f(const Vec& x, const Vec& p, const ProtocolParams& params,
                  const CertifiedConstants& consts) {
    const double field_norm = edm_field(x, p, params).norm();
    const double grad_norm = grad_x_storage(x, p, params).norm();
    return consts.M * (consts.b_df * field_norm + grad_norm);
}

CertifiedConstants compute_constants(const GameDefinition& game, const ProtocolParams& params,
                                     const DelayMatrix& delays, double delta) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("compute_constants: delta must lie in (0, 1/2)");
    const double n = static_cast<double>(game.n);
    const double sqrt_n = std::sqrt(n);

    CertifiedConstants c;
    c.delta = delta;
    c.b_df = game.bound_df;
    c.rho = params.rho;
    c.d_i = delays.column_sums();
    c.d_max = delays.max_delay();
    c.N = n * sqrt_n;
    c.M = (1.0 + 2.0 * params.rho * c.b_df * sqrt_n) * n * std::sqrt(c.d_i.squaredNorm());
    // The rate-update analysis requires strict K > (1-delta)^{-1} M (B_DF + 1/(2 rho)) n^0.5;
    // a fixed 1% margin makes the choice deterministic.
    const double k_bound = (1.0 / (1.0 - delta)) * c.M * (c.b_df + 1.0 / (2.0 * params.rho)) * sqrt_n;
    c.K = 1.01 * k_bound;
    c.L = sqrt_n / (2.0 * params.rho) + c.b_df * sqrt_n;
    return c;
}

double epsilon(double lambda, const CertifiedConstants& consts, int n) {
    if (lambda <= 0.0) throw std::invalid_argument("epsilon: lambda must be positive");
    const double n4 = std::pow(static_cast<double>(n), 4);
    return std::sqrt(n4 * consts.K * lambda / (2.0 * consts.rho));
}

double epsilon_bar(double lambda, const CertifiedConstants& consts, int n) {
    const double n15 = std::pow(static_cast<double>(n), 1.5);
    return epsilon(lambda, consts, n) + 2.0 * consts.d_max * consts.L * n15 * lambda;
}

}  // namespace popdyn
