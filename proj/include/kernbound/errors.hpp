#pragma once

#include <stdexcept>
#include <string>

namespace kernbound {

// Bad parameters, infeasible weights, capacity limits. Maps to CLI exit 2.
class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or degenerate inputs, PSD violations, unreadable files. Maps to
// CLI exit 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kernbound
