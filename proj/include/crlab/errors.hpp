#pragma once

#include <stdexcept>
#include <string>

namespace crlab {

// Base class for every domain failure raised by the library. The CLI maps
// these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class InvalidActionError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class EnumerationOverflow : public Error {
 public:
  EnumerationOverflow(std::size_t found, std::size_t cap)
      : Error("super-arm enumeration exceeded cap " + std::to_string(cap) +
              " (at least " + std::to_string(found) + " super arms)"),
        found_(found) {}
  std::size_t found_at_least() const { return found_; }

 private:
  std::size_t found_;
};

// Configuration problems carry the JSON path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace crlab
