#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace npk {

/// Base of every error raised by the library. `kind()` is the stable
/// machine-readable name used in CLI reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define NPK_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

// weil_algebra
NPK_DEFINE_ERROR(InfiniteDimensional);
NPK_DEFINE_ERROR(EmptyPresentation);
NPK_DEFINE_ERROR(InvalidPresentation);
NPK_DEFINE_ERROR(DimensionMismatch);
NPK_DEFINE_ERROR(NotInvertible);
NPK_DEFINE_ERROR(IndexOutOfRange);

// smooth_expr
NPK_DEFINE_ERROR(UnknownVariable);
NPK_DEFINE_ERROR(DomainError);

// near_points
NPK_DEFINE_ERROR(BasePointOutsideTarget);
NPK_DEFINE_ERROR(InvalidChart);

// vector_fields
NPK_DEFINE_ERROR(AlgebraMismatch);
NPK_DEFINE_ERROR(NotADerivation);
NPK_DEFINE_ERROR(UnknownIdentity);

// a_forms
NPK_DEFINE_ERROR(ArityMismatch);
NPK_DEFINE_ERROR(DegreeOverflow);

// cohomology
NPK_DEFINE_ERROR(NotStarShaped);
NPK_DEFINE_ERROR(NonPolynomialCoefficient);
NPK_DEFINE_ERROR(NonTrigPolynomial);
NPK_DEFINE_ERROR(NotClosed);
NPK_DEFINE_ERROR(NotConstant);
NPK_DEFINE_ERROR(ChartMismatch);

#undef NPK_DEFINE_ERROR

/// Parse failure carrying the byte offset into the input text.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error("SyntaxError", what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace npk
