#pragma once

#include <stdexcept>
#include <string>

namespace mavoid {

// Base for every error raised by the library. Subclasses map onto the
// failure classes the CLI turns into exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatch, non-skew matrix, bad option.
class InputError : public Error {
 public:
  using Error::Error;
};

// Point pair outside the chart where exp/log are diffeomorphisms.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Potential gradient undefined (coincident agents with k < 2).
class SingularityError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class RecipeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : Error(what), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace mavoid
