#pragma once

#include <stdexcept>
#include <string>

namespace hallens {

// Raised for malformed or inconsistent input data (bad records, missing ids,
// unreadable files). Maps to exit code 2 in the CLI.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a caller violates an operation's precondition.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace hallens
