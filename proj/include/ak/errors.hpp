#pragma once

#include <stdexcept>
#include <string>

namespace ak {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMatrix : public Error { using Error::Error; };
class NotPositiveDefinite : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class CatalogMiss : public Error { using Error::Error; };
class ParamError : public Error { using Error::Error; };
class NoMeasure : public Error { using Error::Error; };
class QuadratureError : public Error { using Error::Error; };
class FamilyInvalid : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class KernelEvalError : public Error { using Error::Error; };
class IntegrabilityError : public Error { using Error::Error; };
class DuplicatePoints : public Error { using Error::Error; };

/// Malformed or schema-violating input documents (kernel specs, point files).
class SchemaError : public Error { using Error::Error; };

}  // namespace ak
