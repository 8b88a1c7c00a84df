#pragma once

#include <stdexcept>
#include <string>

namespace spmo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// A kernel or posterior covariance could not be factorised even after
/// the maximum jitter was added.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

class InvalidData : public Error {
 public:
  using Error::Error;
};

/// Input outside a problem's box bounds.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class OptimisationFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace spmo
