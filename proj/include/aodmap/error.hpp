#pragma once

#include <stdexcept>
#include <string>

namespace aodmap {

// Bad dimensions, malformed config, invalid hyperparameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside a function's domain (e.g. tau outside the table knots).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Unreadable or inconsistent files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A solver could not start from the given state (non-finite objective term).
class InitializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace aodmap
