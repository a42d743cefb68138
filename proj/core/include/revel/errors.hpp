#pragma once

#include <stdexcept>
#include <string>

namespace revel {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension or length mismatch between arguments.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value violates a domain invariant (probabilities, masks, grids).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A batch would exceed the evaluation budget of the task.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// The black box failed: protocol error, timeout, process exit or a
/// malformed response.
class BlackBoxError : public Error {
 public:
  using Error::Error;
};

/// Unregularized least-squares system without a unique solution.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

}  // namespace revel
