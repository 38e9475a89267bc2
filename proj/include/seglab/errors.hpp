#pragma once

#include <stdexcept>
#include <string>

namespace seglab {

// Configuration/CLI problems (bad flags, malformed config JSON). Exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data problems (malformed files, shape mismatches, bad class indices). Exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failures (non-finite losses or gradients). Exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace seglab
