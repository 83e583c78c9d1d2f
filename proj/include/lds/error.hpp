// error.hpp - exception taxonomy shared by every layer of the simulator

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lds {

// Invalid input: bad parameters, dimension mismatch, caps exceeded.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical postcondition failed (quadrature self-check, isometry residual,
// PSD drift, non-Hermitian result, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalError {
public:
    SingularMatrixError(const std::string& what, std::size_t nullity_estimate)
        : NumericalError(what), nullity_(nullity_estimate) {}
    std::size_t nullity_estimate() const noexcept { return nullity_; }

private:
    std::size_t nullity_;
};

class StiffnessError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Iterative procedure hit its cap without meeting its target.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lds
