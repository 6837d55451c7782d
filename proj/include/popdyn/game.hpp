#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace popdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Membership tolerance for the strategy simplex and for zero-tests on residuals.
inline constexpr double kSimplexTol = 1e-9;

// x lies in the extended state space: entries >= 0, total mass <= 1.
bool in_extended_simplex(const Vec& x, double tol = kSimplexTol);

// x lies in the simplex proper: additionally |sum - 1| <= tol.
bool in_simplex(const Vec& x, double tol = kSimplexTol);

// A population game: payoff map, its differential, a bound on the differential's
// spectral norm over the extended simplex, and the known Nash equilibria (possibly
// empty for custom games until populated).
struct GameDefinition {
    int n = 0;
    std::function<Vec(const Vec&)> payoff;
    std::function<Mat(const Vec&)> jacobian;
    double bound_df = 0.0;
    bool linear = false;
    Mat payoff_matrix;  // valid when linear
    std::vector<Vec> ne_set;
    std::string name;
};

// Rock-Paper-Scissors with payoffs (-a x2 + b x3, b x1 - a x3, -a x1 + b x2).
GameDefinition make_rps_game(double a, double b);

// Linear game p = A x. Callers may supply known equilibria.
GameDefinition make_linear_game(const Mat& A, std::vector<Vec> ne = {});

Vec evaluate_payoff(const GameDefinition& game, const Vec& x);
Mat evaluate_jacobian(const GameDefinition& game, const Vec& x);

// Max spectral norm of the differential over a grid of the extended simplex.
// Exact (grid ignored) for linear games.
double estimate_bound_df(const GameDefinition& game, int grid_resolution);

struct ContractivityReport {
    bool contractive = false;
    double worst_value = 0.0;  // max of t' DF(z) t over sampled unit tangents t
    Vec witness_x;
    Vec witness_tangent;
};

// Samples simplex points and unit tangents and maximizes the quadratic form
// t' DF(z) t. Linear games get the exact eigenvalue test on top of the sampling.
ContractivityReport verify_contractive(const GameDefinition& game, int sample_count);

// |1 - sum(x)| + max_i x_i [max_j p_j - p_i]_+ ; zero exactly at Nash equilibria.
double ne_residual(const GameDefinition& game, const Vec& x);

// Minimum Euclidean distance from x to the known equilibria. Throws when the
// NE set is empty; callers without one fall back to ne_residual.
double nash_distance(const GameDefinition& game, const Vec& x);

// Enumerates the lattice {k/r : k_i >= 0, sum(k) <= r} covering the extended simplex.
void for_each_grid_point(int n, int resolution, const std::function<void(const Vec&)>& fn);

// Refinement grid search minimizing ne_residual over the simplex; returns the best
// point found once the cell size drops below `resolution`.
std::vector<Vec> find_ne_by_grid(const GameDefinition& game, double resolution = 1e-3);

}  // namespace popdyn
