#pragma once

#include <stdexcept>
#include <string>

namespace breakscan {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Condition estimate above the shared 1e12 threshold, or exact singularity.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

// A11 or its Schur complement not invertible in a block inverse.
class SingularBlock : public Error {
 public:
  using Error::Error;
};

// Implied innovation covariance is not positive semidefinite.
class InvalidCovariance : public Error {
 public:
  using Error::Error;
};

class SingularDesign : public Error {
 public:
  using Error::Error;
};

class RegimeTooSmall : public Error {
 public:
  using Error::Error;
};

// Z'X moment matrix of a regime is numerically singular.
class SingularMoment : public Error {
 public:
  using Error::Error;
};

// The Q covariance sandwich is numerically singular.
class SingularQ : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

class EmptyGrid : public Error {
 public:
  using Error::Error;
};

// More than 5% of grid points failed during a scan.
class ScanFailed : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Invalid configuration or argument values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace breakscan
