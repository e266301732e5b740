#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace clockspec {

using cplx = std::complex<double>;
inline constexpr double PI = std::numbers::pi_v<double>;

// Thrown on malformed user input (config files, CLI arguments, invalid
// parameter combinations).  Mapped to exit code 2 by the CLI.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a computation cannot continue (accumulator overflow,
// exhausted precision budget, failed bracket).  Mapped to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace clockspec
