#pragma once

#include <stdexcept>
#include <string>

namespace mpsflow {

// Failure categories map onto CLI exit codes: config=2, resource=3, numerical=4.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

// Violated caller contract (e.g. non-canonical chain passed where canonical is required).
struct PreconditionError : Error {
  explicit PreconditionError(const std::string& msg) : Error(msg) {}
};

struct ResourceCapError : Error {
  explicit ResourceCapError(const std::string& msg) : Error(msg) {}
};

struct NumericalConsistencyError : Error {
  explicit NumericalConsistencyError(const std::string& msg) : Error(msg) {}
};

struct SolverError : Error {
  explicit SolverError(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace mpsflow
