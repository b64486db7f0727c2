#pragma once

#include <stdexcept>
#include <string>

namespace hji {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed grids, configs, expressions.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// An evaluator returned a non-finite value or failed outright.
class ModelEvaluationError : public Error {
 public:
  using Error::Error;
};

/// a(x) = sigma sigma^T is not positive definite somewhere on the grid.
class NondegeneracyError : public Error {
 public:
  using Error::Error;
};

class InvalidGameError : public Error {
 public:
  using Error::Error;
};

/// Reducible or otherwise structurally unusable operator.
class StructureError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Enumeration would exceed the combinatorial budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace hji
