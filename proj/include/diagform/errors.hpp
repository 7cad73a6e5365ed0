#pragma once

#include <stdexcept>
#include <string>

namespace diagform {

// All library failures derive from Error so callers (the CLI in particular)
// can map categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value left the representable integer range (e.g. x^d above 2^63).
class RangeError : public Error {
 public:
  using Error::Error;
};

// A computation was refused up front because its projected size exceeds a cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Invalid arguments or violated preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ArrangementError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace diagform
