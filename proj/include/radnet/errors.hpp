#pragma once

#include <stdexcept>
#include <string>

namespace radnet {

/// Precondition or argument violation.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An object was used out of sequence, e.g. a cache from a different parameter revision.
class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// NaN/inf detected during training or a degenerate normalization.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace radnet
