#pragma once

#include <stdexcept>
#include <string>

namespace ifmem {

/// Input outside an operation's mathematical domain (non-finite voltage,
/// state outside [0,1], invalid parameter values).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed file content: bad header, unknown or missing keys.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a data invariant (non-monotonic time,
/// empty group, non-finite sample).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two traces that cannot be compared sample by sample.
class AlignmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite intermediate values during simulation or search.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// MPE with an all-zero measured trace.
class NormalizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Truncated-normal rejection sampling exhausted its attempt budget.
class InfeasibleDistributionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ifmem
