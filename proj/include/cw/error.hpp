#pragma once

#include <stdexcept>
#include <string>

namespace cw {

// Base for every failure raised by the library. The CLI maps ConfigError to
// exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NoRootError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class CapExceededError : public Error {
 public:
  using Error::Error;
};

class DivergentSeriesError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class GridTooNarrowError : public Error {
 public:
  GridTooNarrowError(const std::string& what, double suggested_half_width)
      : Error(what), suggested_half_width_(suggested_half_width) {}
  double suggested_half_width() const noexcept { return suggested_half_width_; }

 private:
  double suggested_half_width_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? ("line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ": " + what)
                       : what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace cw
