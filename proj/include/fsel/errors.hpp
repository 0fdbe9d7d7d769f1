#pragma once

#include <stdexcept>
#include <string>

namespace fsel {

// Bad or unusable input data: unreadable files, header mismatches, bad tokens.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid pipeline configuration or out-of-range parameters.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fsel
