#pragma once

#include <stdexcept>
#include <string>

namespace msvi {

/// Base class for every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a dataset invariant (shape, positivity, finiteness).
class InvalidDataError : public Error {
 public:
  using Error::Error;
};

/// A parameter or argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a valid result (non-PSD matrix,
/// non-positive likelihood factor, failed factorization).
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace msvi
