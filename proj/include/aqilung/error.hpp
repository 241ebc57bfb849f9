// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aqilung {

/// Broad error families. The CLI maps each family onto an exit status.
enum class ErrorKind {
  kUsage,
  kValidation,
  kNumeric,
  kConvergence,
  kIo,
};

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Short snake_case identifier, stable across releases.
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(ErrorKind::kUsage, "usage", msg) {}
};

class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& msg)
      : Error(ErrorKind::kUsage, "config",
              line ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg)
      : Error(ErrorKind::kValidation, "dimension", msg) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(ErrorKind::kValidation, "domain", msg) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg, std::string field = {})
      : Error(ErrorKind::kValidation, "validation", msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Malformed cell in a tabular source.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& msg)
      : Error(ErrorKind::kValidation, "parse",
              "row " + std::to_string(row) + ", column '" + column + "': " + msg),
        row_(row),
        column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class DecodeError : public Error {
 public:
  DecodeError(std::string format, const std::string& msg)
      : Error(ErrorKind::kValidation, "decode", format + ": " + msg), format_(std::move(format)) {}
  const std::string& format() const noexcept { return format_; }

 private:
  std::string format_;
};

/// Concentration above the last breakpoint segment.
class OverflowError : public Error {
 public:
  OverflowError(double max_index, const std::string& msg)
      : Error(ErrorKind::kValidation, "overflow", msg), max_index_(max_index) {}
  double max_index() const noexcept { return max_index_; }

 private:
  double max_index_;
};

class NumericError : public Error {
 public:
  NumericError(std::string layer, const std::string& msg)
      : Error(ErrorKind::kNumeric, "numeric", layer + ": " + msg), layer_(std::move(layer)) {}
  const std::string& layer() const noexcept { return layer_; }

 private:
  std::string layer_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& msg)
      : Error(ErrorKind::kConvergence, "divergence",
              "epoch " + std::to_string(epoch) + ": " + msg),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(double worst_violation, const std::string& msg)
      : Error(ErrorKind::kConvergence, "non_convergence", msg), worst_(worst_violation) {}
  double worst_violation() const noexcept { return worst_; }

 private:
  double worst_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& msg)
      : Error(ErrorKind::kIo, "io", path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ChecksumError : public Error {
 public:
  explicit ChecksumError(const std::string& msg) : Error(ErrorKind::kIo, "checksum", msg) {}
};

class VersionError : public Error {
 public:
  explicit VersionError(const std::string& msg) : Error(ErrorKind::kIo, "version", msg) {}
};

/// Artifact kind or feature schema differs from what the caller expects.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& msg) : Error(ErrorKind::kValidation, "schema", msg) {}
};

}  // namespace aqilung
