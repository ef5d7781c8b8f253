#pragma once

#include <stdexcept>
#include <string>

namespace ankge {

// Malformed input files, inconsistent checkpoints, digest mismatches.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite losses or scores.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ankge
