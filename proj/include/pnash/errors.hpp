#pragma once

#include <stdexcept>
#include <string>

namespace pnash {

// Operation is not defined for the given object (e.g. polytope projection,
// potential of a game that declares none).
class UnsupportedError : public std::logic_error {
public:
    explicit UnsupportedError(const std::string& what) : std::logic_error(what) {}
};

// A rival profile leaves a player with an empty feasible set.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid run or experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Simplex exceeded its pivot budget or met an inconsistent tableau.
class LpError : public std::runtime_error {
public:
    explicit LpError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pnash
