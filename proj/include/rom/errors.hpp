#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rom {

enum class ErrorKind {
  usage,       // bad configuration or arguments
  validation,  // a value outside its declared domain
  data,        // malformed or inconsistent data
  numerical,   // factorization failure, divergence, non-finite results
  io,
};

/// Base class for every error raised by the library. The kind decides the
/// CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class KindedError : public Error {
 public:
  explicit KindedError(const std::string& message) : Error(K, message) {}
};

using ConfigError = KindedError<ErrorKind::usage>;
using ValidationError = KindedError<ErrorKind::validation>;
using DataError = KindedError<ErrorKind::data>;
using NumericalError = KindedError<ErrorKind::numerical>;
using IoError = KindedError<ErrorKind::io>;

std::string_view to_string(ErrorKind kind) noexcept;

/// Exit codes: 0 ok, 2 usage, 3 data, 4 numerical, 5 I/O.
int exit_code(ErrorKind kind) noexcept;

/// Prefixes the message with a module context and rethrows the same kind.
[[noreturn]] void rethrow_with_context(const Error& error, std::string_view context);

}  // namespace rom
