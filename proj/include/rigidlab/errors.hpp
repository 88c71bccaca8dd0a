#pragma once

#include <stdexcept>
#include <string>

namespace rigidlab {

// Error taxonomy shared by the library and the CLI exit-code mapping:
//   ConfigError    -> exit 1 (bad parameters, invalid input objects)
//   ResourceError  -> exit 2 (budget exhausted, horizon too small)
//   PrecisionError -> exit 2 (requested work needs more bits than supplied)
//   InternalError  -> exit 3 (invariant broken; always a bug)
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error("config: " + msg) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& msg) : Error("budget: " + msg) {}
};

class PrecisionError : public Error {
 public:
  explicit PrecisionError(const std::string& msg)
      : Error("precision: " + msg) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& msg) : Error("internal: " + msg) {}
};

}  // namespace rigidlab
