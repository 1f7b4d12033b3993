#pragma once

#include <stdexcept>
#include <string>

namespace svi {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter outside its documented range.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to bracket or converge.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// A coefficient or state evaluated to NaN or infinity.
class NonFinite : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Experiment setup inconsistent with the operation's preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Rate fit requested on data that cannot be log-transformed.
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

}  // namespace svi
