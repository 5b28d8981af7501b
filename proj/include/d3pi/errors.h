#pragma once

#include <stdexcept>
#include <string>

namespace d3pi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands have incompatible shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A dense matrix is not in the expected block pattern.
class StructureError : public Error {
 public:
  StructureError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Singular/indefinite/unstable operands, or non-finite results.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The simulated network state blew past the divergence threshold.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An iterative procedure exhausted its budget.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace d3pi
