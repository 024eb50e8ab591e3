#pragma once

#include <stdexcept>
#include <string>

namespace mmar {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto distinct process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes do not conform (wrong matrix size, window length, vector length).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A parameter value lies outside the admissible set (non-SPD scale,
// negative reconstruction radicand, zero coefficient matrix, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Iterative numerics broke down: non-finite likelihood, divergent
// simulation, singular Gram matrix after jitter.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed input files or configuration.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmar
