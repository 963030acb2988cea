#pragma once

#include <stdexcept>
#include <string>

namespace rydpshe {

// Base for every error raised by the physics and sweep layers.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument outside an operation's domain (negative rates, bad angle).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A linear system or closed-form denominator vanished.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf reached an operation from upstream.
class PropagationError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Brewster search found no interior minimum.
class SearchError : public Error {
 public:
  using Error::Error;
};

// Reflected beam leaks into the edge of the transform window.
class WindowError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& msg)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rydpshe
