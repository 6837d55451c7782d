#include "popdyn/revision.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace popdyn;

namespace {

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

const ProtocolParams kQuarter{0.25, 3};

ProtocolParams rps_reference_params() { return kQuarter; }

CertifiedConstants rps_reference_constants(double delta = 0.25) {
    const GameDefinition g = make_rps_game(1.0, 2.0);
    return compute_constants(g, rps_reference_params(), make_abs_diff_delays(3), delta);
}

}  // namespace

TEST_CASE("switch rate") {
    const Vec p = v3(0, 2, -1);
    CHECK(switch_rate(p, 0, 1, kQuarter) == doctest::Approx(0.5));
    CHECK(switch_rate(p, 1, 0, kQuarter) == 0.0);
    CHECK(switch_rate(p, 2, 2, kQuarter) == 0.0);
    CHECK_THROWS_AS(switch_rate(p, 0, 3, kQuarter), std::out_of_range);
}

TEST_CASE("rho calibration") {
    SUBCASE("rps(1,2) binds at 4") {
        const GameDefinition g = make_rps_game(1.0, 2.0);
        const RhoCalibration cal = max_valid_rho(g, 200);
        CHECK_FALSE(cal.any_rho_valid);
        CHECK(cal.worst_gap_sum == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(cal.rho == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(cal.worst_gap_sum ==
              doctest::Approx(oracles::worst_gap_sum_grid(g.payoff, 3, 60)).epsilon(1e-12));
    }
    SUBCASE("zero game accepts any rho") {
        const GameDefinition zero = make_linear_game(Mat::Zero(3, 3));
        const RhoCalibration cal = max_valid_rho(zero, 10);
        CHECK(cal.any_rho_valid);
        CHECK(std::isinf(cal.rho));
    }
    SUBCASE("rps(1,1)") {
        const GameDefinition g = make_rps_game(1.0, 1.0);
        const RhoCalibration cal = max_valid_rho(g, 200);
        CHECK(cal.rho <= 0.5);
        CHECK(cal.worst_gap_sum ==
              doctest::Approx(oracles::worst_gap_sum_grid(g.payoff, 3, 60)).epsilon(1e-12));
    }
    SUBCASE("calibrated rho satisfies the protocol inequality on samples") {
        const GameDefinition g = make_rps_game(1.0, 2.0);
        const double rho = max_valid_rho(g, 200).rho;
        std::mt19937 rng(3);
        for (int s = 0; s < 500; ++s) {
            const Vec p = g.payoff(oracles::random_extended_state(rng, 3));
            for (int i = 0; i < 3; ++i) {
                double sum = 0.0;
                for (int j = 0; j < 3; ++j) {
                    const double pair = rho * std::max(p(j) - p(i), 0.0);
                    CHECK(pair <= 1.0 + 1e-12);
                    sum += pair;
                }
                CHECK(sum <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("edm field") {
    CHECK(edm_field(v3(1.0 / 3, 1.0 / 3, 1.0 / 3), v3(5, 5, 5), kQuarter).norm() == 0.0);
    CHECK(edm_field(v3(1, 0, 0), v3(0, 2, -1), kQuarter).isApprox(v3(-0.5, 0.5, 0), 1e-14));
    CHECK(edm_field(v3(0, 0, 0), v3(1, 2, 3), kQuarter).norm() == 0.0);
    CHECK_THROWS_AS(edm_field(Vec::Zero(2), v3(1, 2, 3), kQuarter), std::invalid_argument);

    std::mt19937 rng(5);
    for (int s = 0; s < 200; ++s) {
        const Vec x = oracles::random_extended_state(rng, 3);
        const Vec p = 3.0 * Vec::Random(3);
        CHECK(edm_field(x, p, kQuarter).isApprox(oracles::smith_field_direct(x, p, 0.25), 1e-12));
    }
}

TEST_CASE("storage and gradients") {
    CHECK(storage(v3(1.0 / 3, 1.0 / 3, 1.0 / 3), v3(1.0 / 3, 1.0 / 3, 1.0 / 3), kQuarter) == 0.0);
    CHECK(storage(v3(1, 0, 0), v3(0, 2, -1), kQuarter) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(storage(v3(0, 1, 0), v3(0, 2, -1), kQuarter) == 0.0);

    CHECK(grad_x_storage(v3(0, 0, 0), v3(7, 7, 7), kQuarter).norm() == 0.0);
    CHECK(grad_x_storage(v3(0.3, 0.3, 0.3), v3(0, 2, -1), kQuarter)
              .isApprox(v3(0.5, 0, 1.25), 1e-14));
    // No positive gap against the best strategy.
    CHECK(grad_x_storage(v3(0.3, 0.3, 0.3), v3(0, 2, -1), kQuarter)(1) == 0.0);

    CHECK(grad_p_storage(v3(1, 0, 0), v3(0, 2, -1), kQuarter).isApprox(v3(-0.5, 0.5, 0), 1e-14));
    CHECK(grad_p_storage(v3(0.1, 0.2, 0.3), v3(4, 4, 4), kQuarter).norm() == 0.0);
    CHECK(grad_p_storage(v3(0, 0, 0), v3(1, 5, 2), kQuarter).norm() == 0.0);
}

TEST_CASE("gradients match finite differences away from kinks") {
    std::mt19937 rng(17);
    int tested = 0;
    while (tested < 1000) {
        const Vec x = oracles::random_simplex_state(rng, 3);
        const Vec p = 3.0 * Vec::Random(3);
        bool near_kink = false;
        for (int i = 0; i < 3 && !near_kink; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j && std::abs(p(j) - p(i)) < 1e-4) {
                    near_kink = true;
                    break;
                }
        if (near_kink) continue;
        ++tested;

        const Vec gx = grad_x_storage(x, p, kQuarter);
        const Vec gx_fd = oracles::fd_gradient(
            [&](const Vec& z) { return storage(z, p, kQuarter); }, x);
        CHECK((gx - gx_fd).norm() <= 1e-6 * std::max(1.0, gx.norm()));

        const Vec gp = grad_p_storage(x, p, kQuarter);
        const Vec gp_fd = oracles::fd_gradient(
            [&](const Vec& q) { return storage(x, q, kQuarter); }, p);
        CHECK((gp - gp_fd).norm() <= 1e-6 * std::max(1.0, gp.norm()));
    }
}

TEST_CASE("dissipation sign: grad_x storage against the field") {
    std::mt19937 rng(19);
    for (int s = 0; s < 10000; ++s) {
        const Vec x = oracles::random_extended_state(rng, 3);
        const Vec p = 5.0 * Vec::Random(3);
        CHECK(grad_x_storage(x, p, kQuarter).dot(edm_field(x, p, kQuarter)) <= 1e-12);
    }
}

TEST_CASE("field components stay within [-1, 1] for a valid rho") {
    const GameDefinition g = make_rps_game(1.0, 2.0);
    std::mt19937 rng(23);
    for (int s = 0; s < 2000; ++s) {
        const Vec x = oracles::random_extended_state(rng, 3);
        const Vec v = edm_field(x, g.payoff(x), kQuarter);
        CHECK(v.maxCoeff() <= 1.0 + 1e-12);
        CHECK(v.minCoeff() >= -1.0 - 1e-12);
    }
}

TEST_CASE("storage dominates every single pair term") {
    std::mt19937 rng(29);
    for (int s = 0; s < 500; ++s) {
        const Vec x = oracles::random_extended_state(rng, 3);
        const Vec p = 4.0 * Vec::Random(3);
        const double sb = storage(x, p, kQuarter);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double gap = std::max(p(j) - p(i), 0.0);
                CHECK(sb >= 0.5 * x(i) * 0.25 * gap * gap - 1e-15);
            }
    }
}

TEST_CASE("field sums to zero on the simplex") {
    std::mt19937 rng(31);
    for (int s = 0; s < 500; ++s) {
        const Vec x = oracles::random_simplex_state(rng, 3);
        const Vec p = 4.0 * Vec::Random(3);
        CHECK(std::abs(edm_field(x, p, kQuarter).sum()) <= 1e-12);
    }
}

TEST_CASE("certified constants for the reference setup") {
    const CertifiedConstants c = rps_reference_constants();

    CHECK(c.N == doctest::Approx(3.0 * std::sqrt(3.0)).epsilon(1e-14));

    // Independent arithmetic for M and K, long double throughout.
    const long double b_df = std::sqrt(7.0L);
    const long double d1 = 0 + 1 + 2, d2 = 1 + 0 + 1, d3 = 2 + 1 + 0;
    const long double sum_d_sq = d1 * d1 + d2 * d2 + d3 * d3;
    CHECK(sum_d_sq == 22.0L);
    const long double m_oracle =
        (1.0L + 2.0L * 0.25L * b_df * std::sqrt(3.0L)) * 3.0L * std::sqrt(sum_d_sq);
    CHECK(c.M == doctest::Approx(static_cast<double>(m_oracle)).epsilon(1e-12));
    CHECK(c.M == doctest::Approx(46.3127).epsilon(1e-4));

    const long double k_bound =
        (1.0L / 0.75L) * m_oracle * (b_df + 1.0L / 0.5L) * std::sqrt(3.0L);
    CHECK(c.K == doctest::Approx(static_cast<double>(1.01L * k_bound)).epsilon(1e-12));
    CHECK(c.K > static_cast<double>(k_bound));
    CHECK(c.K == doctest::Approx(501.86).epsilon(1e-3));

    CHECK(c.L == doctest::Approx(std::sqrt(3.0) * 2.0 + std::sqrt(7.0) * std::sqrt(3.0))
                     .epsilon(1e-12));
    CHECK(c.d_max == 2.0);
    CHECK(c.d_i.isApprox(Vec{{3.0, 2.0, 3.0}}, 1e-15));

    const GameDefinition g = make_rps_game(1.0, 2.0);
    CHECK_THROWS_AS(compute_constants(g, kQuarter, make_abs_diff_delays(3), 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(compute_constants(g, kQuarter, make_abs_diff_delays(3), 0.0),
                    std::invalid_argument);
}

TEST_CASE("K dominates the coupling everywhere it claims to") {
    const CertifiedConstants c = rps_reference_constants();
    const GameDefinition g = make_rps_game(1.0, 2.0);
    std::mt19937 rng(37);
    for (int s = 0; s < 2000; ++s) {
        const Vec x = oracles::random_extended_state(rng, 3);
        const double f = coupling_f(x, g.payoff(x), kQuarter, c);
        CHECK(c.K > f / (1.0 - c.delta));
    }
}

TEST_CASE("epsilon scaling") {
    const CertifiedConstants c = rps_reference_constants();
    for (double lam : {1e-6, 1e-3, 0.1, 1.0})
        CHECK(epsilon(4.0 * lam, c, 3) == doctest::Approx(2.0 * epsilon(lam, c, 3)).epsilon(1e-12));
    CHECK(epsilon(1e-15, c, 3) < 1e-4);
    CHECK(epsilon(1.0, c, 3) == doctest::Approx(std::sqrt(162.0 * c.K)).epsilon(1e-12));
    CHECK_THROWS_AS(epsilon(0.0, c, 3), std::invalid_argument);
    CHECK_THROWS_AS(epsilon(-1.0, c, 3), std::invalid_argument);
}

TEST_CASE("epsilon_bar") {
    CertifiedConstants c = rps_reference_constants();
    SUBCASE("delay-free reduction") {
        c.d_max = 0.0;
        for (double lam : {1e-4, 0.3, 1.0})
            CHECK(epsilon_bar(lam, c, 3) == epsilon(lam, c, 3));
    }
    SUBCASE("strictly increasing in lambda") {
        double prev = 0.0;
        for (int k = -10; k <= 0; ++k) {
            const double val = epsilon_bar(std::pow(2.0, k), c, 3);
            CHECK(val > prev);
            prev = val;
        }
    }
    SUBCASE("vanishes with lambda") { CHECK(epsilon_bar(1e-16, c, 3) < 1e-4); }
}

TEST_CASE("coupling f") {
    const CertifiedConstants c = rps_reference_constants();

    CHECK(coupling_f(v3(1.0 / 3, 1.0 / 3, 1.0 / 3), v3(1.0 / 3, 1.0 / 3, 1.0 / 3), kQuarter, c) ==
          0.0);
    CHECK(coupling_f(v3(0, 0, 0), v3(2, 2, 2), kQuarter, c) == 0.0);

    const double f = coupling_f(v3(1, 0, 0), v3(0, 2, -1), kQuarter, c);
    const long double field_norm = std::sqrt(0.5L);
    const long double grad_norm = std::sqrt(0.25L + 1.5625L);
    const long double expected = c.M * (std::sqrt(7.0L) * field_norm + grad_norm);
    CHECK(f == doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));

    // The closed-form cap used by the K bound.
    const double cap = c.M * (c.b_df + 2.0) * std::sqrt(3.0);
    std::mt19937 rng(41);
    const GameDefinition g = make_rps_game(1.0, 2.0);
    for (int s = 0; s < 500; ++s) {
        const Vec x = oracles::random_extended_state(rng, 3);
        CHECK(coupling_f(x, g.payoff(x), kQuarter, c) <= cap + 1e-9);
    }
}
