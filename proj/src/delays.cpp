#include "popdyn/delays.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace popdyn {

double DelayMatrix::min_positive() const {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < d.rows(); ++j)
        for (Eigen::Index i = 0; i < d.cols(); ++i)
            if (d(j, i) > 0.0) m = std::min(m, d(j, i));
    return m;
}

DelayMatrix make_delay_matrix(const Mat& d) {
    if (d.rows() != d.cols() || d.rows() < 1)
        throw std::invalid_argument("delay matrix must be square");
    if (d.minCoeff() < 0.0) throw std::invalid_argument("delay matrix entries must be >= 0");
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        if (d(i, i) != 0.0) throw std::invalid_argument("delay matrix diagonal must be zero");
    return DelayMatrix{d};
}

DelayMatrix make_abs_diff_delays(int n) {
    Mat d(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) d(j, i) = std::abs(i - j);
    return DelayMatrix{d};
}

}  // namespace popdyn
