#pragma once

#include <stdexcept>
#include <string>

namespace echoform {

// Bad argument values (wrong lengths, out-of-range parameters, mismatched rates).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Input outside the mathematical domain of an operation (e.g. x <= 0 for y_n(x)).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Recurrence or series blew past representable range.
class OverflowError : public std::overflow_error {
public:
    explicit OverflowError(const std::string& what) : std::overflow_error(what) {}
};

// Numerical failure with context (non-finite partial-wave result etc).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Matched-filter gate contained no peak above threshold.
class NoDetectionError : public std::runtime_error {
public:
    explicit NoDetectionError(const std::string& what) : std::runtime_error(what) {}
};

// Requested estimation band is mostly outside the pulse's occupied spectrum.
class IllConditionedBandError : public std::runtime_error {
public:
    explicit IllConditionedBandError(const std::string& what) : std::runtime_error(what) {}
};

// File/manifest read or write failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace echoform
