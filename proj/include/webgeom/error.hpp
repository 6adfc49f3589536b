#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace webgeom {

/// Byte range [begin, end) into the source text of an expression.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Base of every error raised by the library. Errors raised while evaluating
/// an expression carry the span of the offending AST node.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}

  const std::optional<SourceSpan>& span() const noexcept { return span_; }
  void set_span(SourceSpan s) {
    if (!span_) span_ = s;
  }

 private:
  std::optional<SourceSpan> span_;
};

#define WEBGEOM_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(what) {}     \
  }

// jetcalc
WEBGEOM_DEFINE_ERROR(ShapeMismatch);
WEBGEOM_DEFINE_ERROR(DivisionByNonUnit);
WEBGEOM_DEFINE_ERROR(DomainError);
WEBGEOM_DEFINE_ERROR(OrderExhausted);

// jetlinalg
WEBGEOM_DEFINE_ERROR(SingularAtPoint);

// webmodel
WEBGEOM_DEFINE_ERROR(TransversalityFailure);
WEBGEOM_DEFINE_ERROR(IntegrabilityFailure);
WEBGEOM_DEFINE_ERROR(InputError);

// connection / curvature
WEBGEOM_DEFINE_ERROR(UnderdeterminedWeb);
WEBGEOM_DEFINE_ERROR(DimensionMismatch);

#undef WEBGEOM_DEFINE_ERROR

/// Parse failure at a byte offset. `expected` lists the token classes that
/// would have been accepted there.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset, std::string expected)
      : Error(what + " at offset " + std::to_string(offset) +
              (expected.empty() ? std::string{} : " (expected " + expected + ")")),
        offset_(offset),
        expected_(std::move(expected)) {
    set_span({offset, offset + 1});
  }

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(const std::string& name, SourceSpan where)
      : Error("unknown identifier '" + name + "' at offset " + std::to_string(where.begin)),
        name_(name) {
    set_span(where);
  }

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

}  // namespace webgeom
