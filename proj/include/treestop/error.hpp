#pragma once

#include <stdexcept>
#include <string>

namespace treestop {

/// Bad arguments or configuration supplied by the caller.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or inconsistent data (trajectory files, price tables, policy files).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A tree or algorithm invariant does not hold, e.g. splitting a node that is not a leaf.
class StructuralError : public std::logic_error {
 public:
  explicit StructuralError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace treestop
