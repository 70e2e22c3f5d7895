#pragma once

#include <stdexcept>
#include <string>

namespace pdecalib {

// Invalid or inconsistent configuration: bad shapes, missing keys, out-of-range
// settings. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime: singular pivot, CFL violation, Newton stall,
// non-finite values. Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pdecalib
