#pragma once

#include <stdexcept>
#include <string>

namespace therminv {

/// Invalid configuration or input file content. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Out-of-range query or mismatched grids between two datasets.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed observation files (bad CSV, misaligned repeat grids, ...).
class IngestError : public std::runtime_error {
public:
    explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure inside a solver. Carries the time at which the
/// integration failed. CLI maps this to exit code 3.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double failing_time)
        : std::runtime_error(what), time(failing_time) {}
    double time;
};

}  // namespace therminv
