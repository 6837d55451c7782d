#pragma once

#include "popdyn/game.hpp"

#include <cstddef>
#include <vector>

namespace popdyn {

// Fixed-step ring buffer of past (x, p, lambda) samples backing the delayed terms.
// Sample m sits at time m * h. x and p are linearly interpolated between grid
// times; lambda is piecewise constant and right-continuous, so an off-grid query
// takes the rate of the left bracketing sample.
class HistoryBuffer {
public:
    HistoryBuffer(double step, int n, std::size_t capacity);

    // Appends the sample for the next grid time.
    void push(const Vec& x, const Vec& p, double lambda);

    // Rewrites the newest sample's rate; used when the rate switches at the
    // current instant (the switch takes effect from this grid time onward).
    void set_current_lambda(double lambda);

    // Interpolated lookup at absolute time t. Queries older than the retained
    // window throw; queries slightly beyond the newest sample clamp to it.
    void lookup(double t, Vec& x_out, Vec& p_out, double& lambda_out) const;

    std::size_t size() const { return count_; }
    double newest_time() const { return (count_ - 1) * step_; }

private:
    struct Entry {
        Vec x;
        Vec p;
        double lambda = 0.0;
    };

    const Entry& entry(std::size_t index) const { return ring_[index % ring_.size()]; }
    Entry& entry(std::size_t index) { return ring_[index % ring_.size()]; }

    double step_;
    std::size_t count_ = 0;  // samples pushed so far; newest index is count_ - 1
    std::vector<Entry> ring_;
};

}  // namespace popdyn
