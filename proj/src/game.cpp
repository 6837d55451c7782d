#include "popdyn/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace popdyn {

bool in_extended_simplex(const Vec& x, double tol) {
    if (x.size() == 0) return false;
    if (x.minCoeff() < -tol) return false;
    return x.sum() <= 1.0 + tol;
}

bool in_simplex(const Vec& x, double tol) {
    return in_extended_simplex(x, tol) && std::abs(x.sum() - 1.0) <= tol;
}

GameDefinition make_rps_game(double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("rps: a, b must be positive");
    Mat A(3, 3);
    A << 0, -a, b,
         b, 0, -a,
         -a, b, 0;
    GameDefinition g = make_linear_game(A);
    Vec ne(3);
    ne << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
    g.ne_set = {ne};
    g.name = "rps";
    return g;
}

GameDefinition make_linear_game(const Mat& A, std::vector<Vec> ne) {
    if (A.rows() != A.cols() || A.rows() < 2)
        throw std::invalid_argument("linear game: matrix must be square, n >= 2");
    GameDefinition g;
    g.n = static_cast<int>(A.rows());
    g.linear = true;
    g.payoff_matrix = A;
    g.payoff = [A](const Vec& x) -> Vec { return A * x; };
    g.jacobian = [A](const Vec&) -> Mat { return A; };
    g.bound_df = A.jacobiSvd().singularValues()(0);
    g.ne_set = std::move(ne);
    g.name = "linear";
    return g;
}

Vec evaluate_payoff(const GameDefinition& game, const Vec& x) {
    if (x.size() != game.n) throw std::invalid_argument("evaluate_payoff: dimension mismatch");
    if (!in_extended_simplex(x))
        throw std::invalid_argument("evaluate_payoff: state outside the extended simplex");
    return game.payoff(x);
}

Mat evaluate_jacobian(const GameDefinition& game, const Vec& x) {
    if (x.size() != game.n) throw std::invalid_argument("evaluate_jacobian: dimension mismatch");
    return game.jacobian(x);
}

double estimate_bound_df(const GameDefinition& game, int grid_resolution) {
    if (grid_resolution < 2) throw std::invalid_argument("estimate_bound_df: grid_resolution >= 2");
    if (game.linear) return game.jacobian(Vec::Zero(game.n)).jacobiSvd().singularValues()(0);
    double worst = 0.0;
    for_each_grid_point(game.n, grid_resolution, [&](const Vec& x) {
        const double s = game.jacobian(x).jacobiSvd().singularValues()(0);
        worst = std::max(worst, s);
    });
    return worst;
}

namespace {

// Orthonormal basis of the zero-sum tangent hyperplane (columns of the returned n x (n-1)).
Mat tangent_basis(int n) {
    Mat span(n, n - 1);
    for (int c = 0; c < n - 1; ++c) {
        Vec v = Vec::Zero(n);
        v(c) = 1.0;
        v(c + 1) = -1.0;
        span.col(c) = v;
    }
    Eigen::HouseholderQR<Mat> qr(span);
    return Mat(qr.householderQ()).leftCols(n - 1);
}

Vec sample_simplex(std::mt19937& rng, int n) {
    std::exponential_distribution<double> expo(1.0);
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = expo(rng);
    return x / x.sum();
}

Vec sample_unit_tangent(std::mt19937& rng, int n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(n);
    double norm = 0.0;
    while (norm < 1e-12) {
        for (int i = 0; i < n; ++i) v(i) = normal(rng);
        v.array() -= v.mean();
        norm = v.norm();
    }
    return v / norm;
}

}  // namespace

ContractivityReport verify_contractive(const GameDefinition& game, int sample_count) {
    if (sample_count < 1) throw std::invalid_argument("verify_contractive: sample_count >= 1");
    ContractivityReport report;
    std::mt19937 rng(0x5eed);

    report.worst_value = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_count; ++s) {
        const Vec z = sample_simplex(rng, game.n);
        const Vec t = sample_unit_tangent(rng, game.n);
        const double q = t.dot(game.jacobian(z) * t);
        if (q > report.worst_value) {
            report.worst_value = q;
            report.witness_x = z;
            report.witness_tangent = t;
        }
    }

    if (game.linear) {
        // Exact: max eigenvalue of the symmetric part restricted to the tangent space.
        const Mat A = game.jacobian(Vec::Zero(game.n));
        const Mat Q = tangent_basis(game.n);
        const Mat H = Q.transpose() * (0.5 * (A + A.transpose())) * Q;
        Eigen::SelfAdjointEigenSolver<Mat> eig(H);
        const int top = game.n - 2;
        const double worst_exact = eig.eigenvalues()(top);
        if (worst_exact > report.worst_value) {
            report.worst_value = worst_exact;
            report.witness_tangent = Q * eig.eigenvectors().col(top);
            report.witness_x = Vec::Constant(game.n, 1.0 / game.n);
        }
    }

    report.contractive = report.worst_value <= kSimplexTol;
    return report;
}

double ne_residual(const GameDefinition& game, const Vec& x) {
    if (!in_extended_simplex(x))
        throw std::invalid_argument("ne_residual: state outside the extended simplex");
    const Vec p = game.payoff(x);
    const double pmax = p.maxCoeff();
    double support_gap = 0.0;
    for (int i = 0; i < game.n; ++i)
        support_gap = std::max(support_gap, x(i) * std::max(pmax - p(i), 0.0));
    return std::abs(1.0 - x.sum()) + support_gap;
}

double nash_distance(const GameDefinition& game, const Vec& x) {
    if (game.ne_set.empty())
        throw std::runtime_error("nash_distance: NE set unknown for this game");
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& z : game.ne_set) best = std::min(best, (x - z).norm());
    return best;
}

void for_each_grid_point(int n, int resolution, const std::function<void(const Vec&)>& fn) {
    Vec x = Vec::Zero(n);
    std::function<void(int, int)> rec = [&](int dim, int remaining) {
        if (dim == n - 1) {
            for (int k = 0; k <= remaining; ++k) {
                x(dim) = static_cast<double>(k) / resolution;
                fn(x);
            }
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            x(dim) = static_cast<double>(k) / resolution;
            rec(dim + 1, remaining - k);
        }
    };
    rec(0, resolution);
}

std::vector<Vec> find_ne_by_grid(const GameDefinition& game, double resolution) {
    const int n = game.n;
    // Coarse pass over the simplex itself (unit-mass slices of the lattice).
    int res = 24;
    Vec best = Vec::Constant(n, 1.0 / n);
    double best_res = ne_residual(game, best);
    for_each_grid_point(n, res, [&](const Vec& x) {
        if (std::abs(x.sum() - 1.0) > 0.5 / res) return;
        Vec z = x / x.sum();
        const double r = ne_residual(game, z);
        if (r < best_res) {
            best_res = r;
            best = z;
        }
    });

    // Local refinement: shrink a simplex-constrained box around the incumbent.
    double width = 1.0 / res;
    while (width > resolution) {
        width *= 0.5;
        const int steps = 4;
        Vec center = best;
        Vec probe(n);
        std::function<void(int)> rec = [&](int dim) {
            if (dim == n) {
                const double s = probe.sum();
                if (s <= 0.0) return;
                Vec z = probe / s;
                const double r = ne_residual(game, z);
                if (r < best_res) {
                    best_res = r;
                    best = z;
                }
                return;
            }
            for (int k = -steps; k <= steps; ++k) {
                const double v = center(dim) + k * width / steps;
                if (v < 0.0 || v > 1.0) continue;
                probe(dim) = v;
                rec(dim + 1);
            }
        };
        rec(0);
    }
    return {best};
}

}  // namespace popdyn
