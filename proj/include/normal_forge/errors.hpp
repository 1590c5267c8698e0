#pragma once

#include <stdexcept>
#include <string>

namespace normal_forge {

// Base of every error the library throws. Callers that only need to report
// failures can catch this; the subclasses let the CLI map errors onto exit
// codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A point at or behind the image plane cannot be projected.
class BehindCamera : public Error {
 public:
  using Error::Error;
};

// Both scaled gradients vanish, so the azimuth is undefined.
class DegenerateDirection : public Error {
 public:
  using Error::Error;
};

// No candidate normal survived in a neighborhood.
class DegenerateNeighborhood : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class EmptyScene : public Error {
 public:
  using Error::Error;
};

class EmptyEvaluation : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// File exists and was readable but its layout is not the expected one.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  // 1-based line number, or 0 when the problem is not tied to one line
  // (for example a missing required key).
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace normal_forge
