#pragma once

#include <stdexcept>
#include <string>

namespace panelms {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (files, flags, configuration).
/// The CLI maps this family to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    using InputError::InputError;
};

/// A documented precondition or parameter constraint was violated.
class PreconditionError : public InputError {
public:
    using InputError::InputError;
};

class GridError : public InputError {
public:
    using InputError::InputError;
};

/// Numerical degeneracy detected in the data. The CLI maps this family to
/// exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

class SingularDesignError : public NumericError {
public:
    SingularDesignError(double u, double h, const std::string& detail)
        : NumericError("singular local design at (u=" + std::to_string(u) +
                       ", h=" + std::to_string(h) + "): " + detail),
          u_(u),
          h_(h) {}

    double u() const noexcept { return u_; }
    double h() const noexcept { return h_; }

private:
    double u_;
    double h_;
};

class DegenerateCovarianceError : public NumericError {
public:
    using NumericError::NumericError;
};

class RankDeficiencyError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace panelms
