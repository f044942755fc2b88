#pragma once

#include <stdexcept>
#include <string>

namespace solitonlab {

// Bad input: parameters, grids, configs. Maps to CLI exit status 2.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An iterative solve did not reach its tolerance. Maps to CLI exit status 3.
struct solver_error : std::runtime_error {
    solver_error(const std::string& what, double last_residual)
        : std::runtime_error(what), residual(last_residual) {}
    double residual;
};

// A check was asked of data it does not apply to (e.g. a standard pair
// handed to the nonstandard lower bound, beta outside a threshold domain).
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Two independently computed quantities disagree beyond tolerance.
struct consistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace solitonlab
