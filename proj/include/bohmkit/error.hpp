#pragma once

#include <stdexcept>
#include <string>

namespace bohmkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A linear system could not be solved (zero pivot).
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// A requested time sample is not available from a field source.
class MissingTimeSample : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration does not satisfy the schema.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {
[[noreturn]] inline void fail(const std::string& what) { throw InvalidArgument(what); }
inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}
}  // namespace detail

}  // namespace bohmkit
