#pragma once

#include <stdexcept>
#include <string>

namespace popdyn {

// Raised for malformed or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when integration produces NaN/Inf; carries the last time the state was finite.
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& msg, double last_good_time_)
        : std::runtime_error(msg), last_good_time(last_good_time_) {}
    double last_good_time = 0.0;
};

}  // namespace popdyn
