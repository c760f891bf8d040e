#pragma once

#include <stdexcept>
#include <string>

namespace crowdsim {

// Broken precondition or dimension mismatch in an API call.
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Bad input file or inconsistent scenario/network definition.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace crowdsim
