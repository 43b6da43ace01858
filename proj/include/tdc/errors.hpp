#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tdc {

/// Operand shapes do not fit the operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar or count argument is outside its documented range.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is well-shaped but numerically unusable (zero-norm vectors).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation produced NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside the segment-then-integrate loop (answerer errors, exhausted scripts).
class OrchestrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Could not open, read or write a file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParseErrorKind { kBadMagic, kVersionMismatch, kTruncated, kMalformed };

const char* to_string(ParseErrorKind kind);

/// Binary container decode failure. `offset` is the byte position where decoding stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::uint64_t offset, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " at byte " + std::to_string(offset) +
                           ": " + what),
        kind_(kind),
        offset_(offset) {}

  ParseErrorKind kind() const noexcept { return kind_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  ParseErrorKind kind_;
  std::uint64_t offset_;
};

inline const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kBadMagic:
      return "bad magic";
    case ParseErrorKind::kVersionMismatch:
      return "version mismatch";
    case ParseErrorKind::kTruncated:
      return "truncated payload";
    case ParseErrorKind::kMalformed:
      return "malformed header";
  }
  return "parse error";
}

}  // namespace tdc
