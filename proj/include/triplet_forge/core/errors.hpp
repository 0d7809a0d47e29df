#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tforge {

/// Error categories shared by every module. The CLI maps these onto its
/// frozen exit-code table.
enum class ErrorKind {
  Io,
  Input,
  EmptyInput,
  Format,
  Size,
  Bounds,
  InvalidKnots,
  Domain,
  Config,
  InvalidFlow,
  Numeric,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Input: return "InputError";
    case ErrorKind::EmptyInput: return "EmptyInputError";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::Size: return "SizeError";
    case ErrorKind::Bounds: return "BoundsError";
    case ErrorKind::InvalidKnots: return "InvalidKnotsError";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::InvalidFlow: return "InvalidFlowError";
    case ErrorKind::Numeric: return "NumericError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class KindedError : public Error {
 public:
  explicit KindedError(const std::string& what) : Error(K, what) {}
};

using IoError = KindedError<ErrorKind::Io>;
using InputError = KindedError<ErrorKind::Input>;
using EmptyInputError = KindedError<ErrorKind::EmptyInput>;
using FormatError = KindedError<ErrorKind::Format>;
using SizeError = KindedError<ErrorKind::Size>;
using BoundsError = KindedError<ErrorKind::Bounds>;
using InvalidKnotsError = KindedError<ErrorKind::InvalidKnots>;
using DomainError = KindedError<ErrorKind::Domain>;
using ConfigError = KindedError<ErrorKind::Config>;
using InvalidFlowError = KindedError<ErrorKind::InvalidFlow>;
using NumericError = KindedError<ErrorKind::Numeric>;

}  // namespace tforge
