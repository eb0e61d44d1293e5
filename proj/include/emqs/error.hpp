#pragma once

#include <stdexcept>
#include <string>

namespace emqs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: grid parameters, materials, scenario fields.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The step matrix (or any matrix handed to the linear solver) is singular.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// The iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace emqs
