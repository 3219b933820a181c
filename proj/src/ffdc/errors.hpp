#pragma once

#include <stdexcept>
#include <string>

namespace ffdc {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was not met by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Invalid user input (config, process file, dataset).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// The data carry no information on some structural components.
class IdentificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ffdc
