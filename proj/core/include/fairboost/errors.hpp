#pragma once

#include <stdexcept>
#include <string>

namespace fairboost {

/// Root of the library's exception hierarchy.  Every error carries a short
/// machine-readable code (stable across releases, used by the CLI's error
/// summary) and a human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

/// Malformed input data: unparsable cells, unknown categories, unmappable
/// labels, schema violations.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or arguments: bad fractions, nonpositive weights,
/// out-of-range hyperparameters, oversized domains.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed: divergence, singular systems, infeasible
/// constraint sets.  The message names the offending quantity.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace fairboost
