#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace adsm {

enum class ErrorKind {
  invalid_parameter,
  unsupported,
  numeric,
  data,
  insufficient_data,
  procedure_abort,
  config,
};

/// Base class of every error raised by the library. The kind drives the
/// CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what)
      : Error(ErrorKind::invalid_parameter, what) {}
};

class Unsupported : public Error {
 public:
  explicit Unsupported(const std::string& what)
      : Error(ErrorKind::unsupported, what) {}
};

/// Quadrature or root-finding failure. Carries the last residual (or error
/// estimate) so callers can judge how far off the result was.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual)
      : Error(ErrorKind::numeric, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what)
      : Error(ErrorKind::insufficient_data, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Every observed node was rejected by the renewal procedure.
class ProcedureAbort : public Error {
 public:
  ProcedureAbort(const std::string& what, std::vector<std::string> reasons)
      : Error(ErrorKind::procedure_abort, what), reasons_(std::move(reasons)) {}

  const std::vector<std::string>& reasons() const noexcept { return reasons_; }

 private:
  std::vector<std::string> reasons_;
};

}  // namespace adsm
