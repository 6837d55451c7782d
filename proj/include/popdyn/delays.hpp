#pragma once

#include "popdyn/game.hpp"

namespace popdyn {

// Transition times: d(j, i) is the time an agent spends revising strategy j -> i.
struct DelayMatrix {
    Mat d;

    int n() const { return static_cast<int>(d.rows()); }
    double max_delay() const { return d.size() ? d.maxCoeff() : 0.0; }
    // d_i = sum_j d(j, i), the per-destination delay column sums.
    Vec column_sums() const { return d.colwise().sum(); }
    // Smallest strictly positive entry; +inf when all delays are zero.
    double min_positive() const;
};

// Validates non-negativity and a zero diagonal.
DelayMatrix make_delay_matrix(const Mat& d);

// The d(j, i) = |i - j| pattern used throughout the reference experiments.
DelayMatrix make_abs_diff_delays(int n);

}  // namespace popdyn
