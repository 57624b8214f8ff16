#pragma once

#include <stdexcept>
#include <string>

namespace coopsym {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: bad grid sizes, non-finite inputs, mismatched fields.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  enum class Kind { MaxItersExceeded, SingularJacobian, LineSearchFailed };

  SolverError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class BracketNotFound : public Error {
 public:
  using Error::Error;
};

class EigenError : public Error {
 public:
  enum class Kind { NonConvergence, NotCooperative, FactorizationFailed };

  EigenError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class DegenerateAxis : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace coopsym
