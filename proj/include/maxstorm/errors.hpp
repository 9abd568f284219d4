#pragma once

#include <stdexcept>
#include <string>

namespace maxstorm {

// Error taxonomy. Each category maps to one CLI exit code (see exit_code()).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied parameters or data violating a documented constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A configured hard cap (storm count, Cholesky size) would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Quadrature non-convergence, Cholesky failure, non-finite likelihood terms.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The requested evaluation is outside what an implementation supports.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

inline int exit_code(const Error& e) {
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const ResourceError*>(&e)) return 4;
  return 2;
}

}  // namespace maxstorm
