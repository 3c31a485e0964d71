#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace slecosmo {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr const char* tool_version = "0.3.0";

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Raised when a tolerance cannot be met; carries the best estimate reached.
struct numerical_error : std::runtime_error {
    double achieved = 0.0;
    numerical_error(const std::string& what, double achieved_estimate)
        : std::runtime_error(what), achieved(achieved_estimate) {}
};

}  // namespace slecosmo
