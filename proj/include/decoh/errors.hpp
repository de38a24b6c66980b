#pragma once

#include <stdexcept>
#include <string>

namespace decoh {

/// Invalid user input: bad parameters, malformed specs, unreadable files.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver a result at the requested accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quadrature ran out of its evaluation budget before meeting the tolerance.
class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double value, double abserr)
        : NumericalError(what), value_(value), abserr_(abserr) {}

    double value() const noexcept { return value_; }
    double abserr() const noexcept { return abserr_; }

private:
    double value_;
    double abserr_;
};

/// Evaluation of a closed-form expression at a point where it is singular.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace decoh
