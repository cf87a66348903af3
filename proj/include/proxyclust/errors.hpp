#pragma once

#include <stdexcept>
#include <string>

namespace proxyclust {

// Root of every error raised by the library. `exit_code()` is the CLI mapping.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Malformed structured input; `what()` carries line/field diagnostics.
class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnknownTokenError : public ConfigError {
 public:
  explicit UnknownTokenError(const std::string& word)
      : ConfigError("unknown token: '" + word + "'"), word_(word) {}
  const std::string& word() const noexcept { return word_; }

 private:
  std::string word_;
};

// Bad magic, version, or truncation in a binary matrix file.
class FormatError : public ConfigError {
 public:
  FormatError(const std::string& message, std::size_t byte_offset);
  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class NormalizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A sampled bound failed for a family that satisfies the theorem's premise.
class TheoremViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BackendUnavailableError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace proxyclust
