#pragma once

#include <stdexcept>
#include <string>

namespace reliroute {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file does not match its column schema (missing column, bad value,
// duplicate id, missing endpoint).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A link's mode touches a node kind it is not allowed to touch.
class TopologyError : public Error {
 public:
  using Error::Error;
};

// A record refers to a node, link, terminal or OD pair that does not exist.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

// A numeric argument lies outside the domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// No valid path connects an OD pair.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

// Raised by the brute-force oracle when the enumeration guard is exceeded.
class OracleRefusal : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace reliroute
