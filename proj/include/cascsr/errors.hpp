#pragma once

#include <stdexcept>
#include <string>

namespace cascsr {

// Invalid argument values, shape mismatches, out-of-range parameters.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Inputs that are structurally valid but unusable (e.g. a flat image fed
// to the shift estimator).
class DegenerateInputError : public ParameterError {
public:
    explicit DegenerateInputError(const std::string& msg) : ParameterError(msg) {}
};

// Non-finite values encountered where finite data is required.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative solver breakdown (loss of positive curvature, divergence).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// File and stream failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cascsr
