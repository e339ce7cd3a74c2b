#pragma once

#include <stdexcept>
#include <string>

namespace comprate {

// A structurally impossible experiment configuration (geometry constraints,
// epsilon out of range). The message names the violated constraint.
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a brute-force operation would exceed its enumeration budget.
class resource_limit_error : public std::runtime_error {
public:
    explicit resource_limit_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace comprate
