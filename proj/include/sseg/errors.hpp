#pragma once

#include <stdexcept>
#include <string>

namespace sseg {

// Exit codes used by the CLI: 0 success, 2 configuration, 3 data, 4 numeric.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 2;
};

// Shape/extent problems (infeasible patch sizes, odd pooling extents, ...).
struct GeometryError : ConfigError {
    explicit GeometryError(const std::string& msg) : ConfigError(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 3;
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 4;
};

}  // namespace sseg
