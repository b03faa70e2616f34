#pragma once

#include <stdexcept>
#include <string>

namespace panel_cpd {

/// Base of all library errors. The category decides the CLI exit code.
class Error : public std::runtime_error {
 public:
  enum class Kind { Usage = 1, Data = 2, Numerical = 3 };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Invalid argument or configuration supplied by the caller.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(Kind::Usage, what) {}
};

/// Malformed or degenerate input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Kind::Data, what) {}
};

/// Non-finite intermediate or other numerical breakdown.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(Kind::Numerical, what) {}
};

}  // namespace panel_cpd
