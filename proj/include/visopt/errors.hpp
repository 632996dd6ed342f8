#pragma once

#include <stdexcept>

namespace visopt {

/// Malformed input file (scenario, pose list, matrix dump, ...).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An operation was called with inputs that violate its contract.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact enumeration would exceed the configured combination budget.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace visopt
