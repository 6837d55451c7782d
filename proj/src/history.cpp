#include "popdyn/history.hpp"

#include <cmath>
#include <stdexcept>

namespace popdyn {

namespace {
// Snap tolerance for grid-index arithmetic; absorbs d/h rounding so delays that
// are integer multiples of the step hit stored samples exactly.
constexpr double kIndexSnap = 1e-9;
}  // namespace

HistoryBuffer::HistoryBuffer(double step, int n, std::size_t capacity)
    : step_(step), ring_(capacity) {
    if (step <= 0.0) throw std::invalid_argument("history: step must be positive");
    if (capacity == 0) throw std::invalid_argument("history: capacity must be positive");
    for (Entry& e : ring_) {
        e.x = Vec::Zero(n);
        e.p = Vec::Zero(n);
    }
}

void HistoryBuffer::push(const Vec& x, const Vec& p, double lambda) {
    Entry& e = entry(count_);
    e.x = x;
    e.p = p;
    e.lambda = lambda;
    ++count_;
}

void HistoryBuffer::set_current_lambda(double lambda) {
    if (count_ == 0) throw std::logic_error("history: empty");
    entry(count_ - 1).lambda = lambda;
}

void HistoryBuffer::lookup(double t, Vec& x_out, Vec& p_out, double& lambda_out) const {
    if (count_ == 0) throw std::logic_error("history: empty");
    const double newest = static_cast<double>(count_ - 1);
    double idx = t / step_;
    if (idx > newest) idx = newest;  // sub-step queries from multi-stage schemes
    if (idx < 0.0) throw std::out_of_range("history: query before initial time");

    double lower_f = std::floor(idx);
    double w = idx - lower_f;
    if (w < kIndexSnap) w = 0.0;
    if (w > 1.0 - kIndexSnap && lower_f + 1.0 <= newest) {
        lower_f += 1.0;
        w = 0.0;
    }
    const auto lower = static_cast<std::size_t>(lower_f);
    const std::size_t oldest = count_ > ring_.size() ? count_ - ring_.size() : 0;
    if (lower < oldest) throw std::out_of_range("history: query older than retained window");

    const Entry& a = entry(lower);
    if (w == 0.0) {
        x_out = a.x;
        p_out = a.p;
        lambda_out = a.lambda;
        return;
    }
    const Entry& b = entry(lower + 1);
    x_out = a.x + w * (b.x - a.x);
    p_out = a.p + w * (b.p - a.p);
    lambda_out = a.lambda;  // piecewise-constant rate
}

}  // namespace popdyn
