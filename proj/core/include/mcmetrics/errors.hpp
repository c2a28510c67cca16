#pragma once

#include <stdexcept>
#include <string>

namespace mcmetrics {

// Bad input: malformed files, violated preconditions, inconsistent shapes.
// The CLI maps this family to exit code 2.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A computation that cannot produce a trustworthy number (indefinite
// covariance, non-convergent eigensolver, ...). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class FormatErrorKind {
  BadMagic,
  UnsupportedVersion,
  UnsupportedDtype,
  Truncated,
  NonFinite,
  InvalidHeader,
  LabelOutOfRange,
  TrailingBytes,
  RaggedRow,
  ParseError,
  Io,
};

const char* to_string(FormatErrorKind kind) noexcept;

class FormatError : public InputError {
public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : InputError(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  FormatErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

private:
  FormatErrorKind kind_;
  std::string detail_;
};

} // namespace mcmetrics
