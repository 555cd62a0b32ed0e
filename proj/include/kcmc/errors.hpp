#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace kcmc {

enum class ErrorKind {
  InvalidInput,
  ConstraintViolation,
  DegenerateGeometry,
  NonConvergence,
  EllipticityLoss,
  BarrierViolation,
  Config,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::EllipticityLoss: return "EllipticityLoss";
    case ErrorKind::BarrierViolation: return "BarrierViolation";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

/// Base error. Solver errors carry the mean curvature and exhaustion
/// index at which they were raised when known.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  std::optional<double> H;
  std::optional<int> k;
  std::optional<int> line;
  std::optional<std::string> key;

 private:
  ErrorKind kind_;
};

#define KCMC_DEFINE_ERROR(Name)                                                  \
  class Name : public Error {                                                    \
   public:                                                                       \
    explicit Name(const std::string& what) : Error(ErrorKind::Name, what) {}     \
  };

KCMC_DEFINE_ERROR(InvalidInput)
KCMC_DEFINE_ERROR(ConstraintViolation)
KCMC_DEFINE_ERROR(DegenerateGeometry)
KCMC_DEFINE_ERROR(NonConvergence)
KCMC_DEFINE_ERROR(EllipticityLoss)
KCMC_DEFINE_ERROR(BarrierViolation)

#undef KCMC_DEFINE_ERROR

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace kcmc
