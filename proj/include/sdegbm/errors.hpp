#pragma once

#include <stdexcept>
#include <string>

namespace sdegbm {

// Structural / configuration problems: bad dimensions, unknown keys,
// invalid parameter values. CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failures: non-finite inputs, overflowing states. Exit code 2.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sdegbm
