#ifndef DEAREST_ERROR_HPP
#define DEAREST_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dearest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or disconnected network description.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// An input violates a documented precondition (shape, symmetry, range).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or experiment description.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string &what, long line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// Iterates became non-finite or unbounded.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string &what, long long iteration)
      : Error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  long long iteration() const noexcept { return iteration_; }

 private:
  long long iteration_;
};

}  // namespace dearest

#endif  // DEAREST_ERROR_HPP
