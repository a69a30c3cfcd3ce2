#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace alphappp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (XES, CSV, JSON log). Carries a 1-based line when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : Error(line ? what + " (line " + std::to_string(*line) + ")" : what), line_(line) {}

  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

/// Invalid parameters: thresholds out of range, unknown preset, missing column.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace alphappp
