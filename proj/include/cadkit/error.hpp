#pragma once

#include <stdexcept>
#include <string>

namespace cadkit {

// Base for every error raised by the toolkit. The subclass names the failure class
// a caller may want to distinguish; the message carries the detail.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class InvalidDomainError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class CertificationError : public Error {
 public:
  using Error::Error;
};

class ContradictionError : public Error {
 public:
  using Error::Error;
};

}  // namespace cadkit
