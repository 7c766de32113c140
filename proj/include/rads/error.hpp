#pragma once

#include <stdexcept>
#include <string>

namespace rads {

// Base for every error the toolkit raises. Callers that only care about
// "something went wrong in rads" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector or matrix dimensions that do not chain.
class InputShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside its documented domain (K = 0, empty pool, budget > pool...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// NaN / infinity where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Class label outside [0, C).
class LabelError : public Error {
 public:
  using Error::Error;
};

// Input data violating a documented invariant (score-file rows, duplicate ids).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Call sequence violation, e.g. stepping an environment that is already done.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace rads
