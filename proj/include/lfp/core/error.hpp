#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfp {

// Failure categories. The CLI maps each one onto an exit code and prints it
// as the "ERROR:<category>:" prefix.
enum class ErrorCategory {
  dimension,
  usage,
  config,
  input,
  integrity,
  numeric,
  decode,
  backend,
  model,
  domain,
  parse,
};

std::string_view category_name(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

template <ErrorCategory C>
class CategorizedError : public Error {
 public:
  explicit CategorizedError(const std::string& message) : Error(C, message) {}
};

using DimensionError = CategorizedError<ErrorCategory::dimension>;
using UsageError = CategorizedError<ErrorCategory::usage>;
using ConfigError = CategorizedError<ErrorCategory::config>;
using InputError = CategorizedError<ErrorCategory::input>;
using IntegrityError = CategorizedError<ErrorCategory::integrity>;
using NumericError = CategorizedError<ErrorCategory::numeric>;
using DecodeError = CategorizedError<ErrorCategory::decode>;
using BackendError = CategorizedError<ErrorCategory::backend>;
using ModelError = CategorizedError<ErrorCategory::model>;
using DomainError = CategorizedError<ErrorCategory::domain>;
using ParseError = CategorizedError<ErrorCategory::parse>;

// Throws the typed error matching a runtime category.
[[noreturn]] void raise(ErrorCategory category, const std::string& message);

}  // namespace lfp
