#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace resavg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

// Non-convergence, blow-up, or a matrix that is not PSD beyond round-off.
struct NumericalError : Error {
    using Error::Error;
};

struct ConvergenceError : NumericalError {
    using NumericalError::NumericalError;
};

// Carries every problem found in a scenario, not only the first.
struct ScenarioError : Error {
    explicit ScenarioError(std::vector<std::string> problems);
    std::vector<std::string> problems;
};

void require_same_dimension(std::size_t expected, std::size_t actual, const char* what);

}  // namespace resavg
