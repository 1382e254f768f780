#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hullcraft {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad caller-supplied data (shapes, ranges, empty inputs).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Misconfigured components (unknown layer tag, missing registry entry).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerically degenerate instance (e.g. zero-norm target embedding).
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss while training; carries the epoch where it happened.
struct DivergenceError : std::runtime_error {
  int epoch;
  explicit DivergenceError(const std::string& what, int epoch_index)
      : std::runtime_error(what), epoch(epoch_index) {}
};

// A brute-force oracle was asked for an instance outside its tractable range.
struct OracleScopeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Aggregation requested over a directory with no usable records.
struct NoDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

}  // namespace hullcraft
