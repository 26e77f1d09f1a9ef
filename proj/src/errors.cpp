#include "rom/errors.hpp"

namespace rom {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::validation: return "validation";
    case ErrorKind::data: return "data";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage: return 2;
    case ErrorKind::validation:
    case ErrorKind::data: return 3;
    case ErrorKind::numerical: return 4;
    case ErrorKind::io: return 5;
  }
  return 1;
}

void rethrow_with_context(const Error& error, std::string_view context) {
  throw Error(error.kind(), std::string(context) + ": " + error.what());
}

}  // namespace rom
