#pragma once

#include "popdyn/delays.hpp"
#include "popdyn/game.hpp"

namespace popdyn {

// Smith pairwise-comparison protocol: switch i -> j with probability rho[p_j - p_i]_+.
// rho must keep every row of switch probabilities summing to at most one.
struct ProtocolParams {
    double rho = 0.0;
    int n = 0;
};

// rho [p(j) - p(i)]_+ for the pair (i -> j).
double switch_rate(const Vec& p, int i, int j, const ProtocolParams& params);

struct RhoCalibration {
    double rho = 0.0;           // +inf when the game has identically equal payoffs
    double worst_gap_sum = 0.0; // max over the grid and i of sum_j [p_j - p_i]_+
    bool any_rho_valid = false;
};

// Largest rho satisfying the protocol's probability constraints on a grid of
// the extended simplex.
RhoCalibration max_valid_rho(const GameDefinition& game, int grid_resolution);

// Normalized Smith vector field (the revision rate factored out): component i is
// sum_j x_j rho[p_i - p_j]_+ - x_i sum_j rho[p_j - p_i]_+.
Vec edm_field(const Vec& x, const Vec& p, const ProtocolParams& params);

// Normalized storage function (1/2) sum_ij x_i rho[p_j - p_i]_+^2.
double storage(const Vec& x, const Vec& p, const ProtocolParams& params);

// Component k: (1/2) sum_j rho[p_j - p_k]_+^2. Independent of x.
Vec grad_x_storage(const Vec& x, const Vec& p, const ProtocolParams& params);

// For the Smith protocol this equals edm_field exactly.
Vec grad_p_storage(const Vec& x, const Vec& p, const ProtocolParams& params);

// Constants certified for the delayed dynamics and the rate-tuning rule:
//   N  bounds ||dx/dt|| <= N lambda,
//   M  bounds ||dy/dt|| <= M lambda^2,
//   K  dominates (1-delta)^{-1} f(x, p) over the extended simplex,
//   L  bounds the storage gradients entering the between-update envelope.
struct CertifiedConstants {
    double N = 0.0;
    double M = 0.0;
    double K = 0.0;
    double L = 0.0;
    double b_df = 0.0;
    double rho = 0.0;
    double d_max = 0.0;
    Vec d_i;
    double delta = 0.0;
};

// f(x, p) = M (B_DF ||V(x,p)||_2 + ||grad_x S(x,p)||_2), the coefficient of the
// delay-induced term in the storage derivative bound. Does not depend on lambda.
double coupling_f(const Vec& x, const Vec& p, const ProtocolParams& params,
                  const CertifiedConstants& consts);

// N and M by their closed formulas; K with a 1% margin above its strict bound;
// L by the closed-form gradient bound. Requires 0 < delta < 1/2.
CertifiedConstants compute_constants(const GameDefinition& game, const ProtocolParams& params,
                                     const DelayMatrix& delays, double delta);

// epsilon(lambda) = sqrt(n^4 K lambda / (2 rho)); bounds the storage right after an update.
double epsilon(double lambda, const CertifiedConstants& consts, int n);

// Envelope between consecutive updates: epsilon(lambda) + 2 d_max L n^1.5 lambda.
double epsilon_bar(double lambda, const CertifiedConstants& consts, int n);

}  // namespace popdyn
