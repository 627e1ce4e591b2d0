#pragma once

#include <stdexcept>
#include <string>

namespace netid {

/// Rejected inputs and violated preconditions. The CLI maps these to exit code 2.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical breakdowns: rank loss, undefined matrix functions, divergence,
/// iteration budgets exhausted. The CLI maps these to exit code 3.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace netid
