#pragma once

#include <stdexcept>
#include <string>

// Error conditions raised by the library.  Every exported operation documents
// which of these it can throw; anything else escaping is a bug.

namespace bldg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPrimePower : Error { using Error::Error; };
struct OrderTooLarge : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct PrecisionOverflow : Error { using Error::Error; };
struct NotContained : Error { using Error::Error; };
struct NotInWindow : Error { using Error::Error; };
struct EnumerationTooLarge : Error { using Error::Error; };
struct NotAdjacent : Error { using Error::Error; };
struct NotClose : Error { using Error::Error; };
struct NotSpecial : Error { using Error::Error; };
struct FaceNotInComplex : Error { using Error::Error; };
struct NotInCommonApartment : Error { using Error::Error; };
struct OverflowError : Error { using Error::Error; };

}  // namespace bldg
