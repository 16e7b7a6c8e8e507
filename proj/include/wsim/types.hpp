#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace wsim {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or malformed data (maps to CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A linear system that should be invertible is not.
class RankError : public Error {
 public:
  using Error::Error;
};

/// A construction would exceed its configured size budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Grid initialisation found no usable grid point.
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// A diagnostic quantity is undefined, e.g. an indefinite information matrix.
class DiagnosticError : public Error {
 public:
  DiagnosticError(const std::string& what, Vector eigenvalues)
      : Error(what), eigenvalues_(std::move(eigenvalues)) {}
  const Vector& eigenvalues() const { return eigenvalues_; }

 private:
  Vector eigenvalues_;
};

}  // namespace wsim
