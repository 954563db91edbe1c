#pragma once

#include <stdexcept>
#include <string>

namespace sdoa {

// Violated operation precondition (bad shapes, out-of-range parameters).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent scenario configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input data (recordings, tables). CLI exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An estimator could not produce the requested number of sources.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok)
        throw PreconditionError(what);
}

} // namespace sdoa
