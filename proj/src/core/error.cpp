#include "lfp/core/error.hpp"

namespace lfp {

std::string_view category_name(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::dimension: return "dimension";
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::config: return "config";
    case ErrorCategory::input: return "input";
    case ErrorCategory::integrity: return "integrity";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::decode: return "decode";
    case ErrorCategory::backend: return "backend";
    case ErrorCategory::model: return "model";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::parse: return "parse";
  }
  return "unknown";
}

[[noreturn]] void raise(ErrorCategory category, const std::string& message) {
  switch (category) {
    case ErrorCategory::dimension: throw DimensionError(message);
    case ErrorCategory::usage: throw UsageError(message);
    case ErrorCategory::config: throw ConfigError(message);
    case ErrorCategory::input: throw InputError(message);
    case ErrorCategory::integrity: throw IntegrityError(message);
    case ErrorCategory::numeric: throw NumericError(message);
    case ErrorCategory::decode: throw DecodeError(message);
    case ErrorCategory::backend: throw BackendError(message);
    case ErrorCategory::model: throw ModelError(message);
    case ErrorCategory::domain: throw DomainError(message);
    case ErrorCategory::parse: throw ParseError(message);
  }
  throw Error(category, message);
}

}  // namespace lfp
