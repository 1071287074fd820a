#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corpuskit {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, lexicons, models or pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// A malformed record or file. `line` is 1-based, 0 when not line-oriented.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Stored checksum does not match the payload.
class ChecksumError : public Error {
 public:
  using Error::Error;
};

}  // namespace corpuskit
