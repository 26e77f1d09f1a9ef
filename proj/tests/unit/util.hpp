#pragma once

#include <optional>

#include "rom/errors.hpp"

/// Kind of the rom::Error thrown by fn, or nullopt if nothing was thrown.
template <typename Fn>
std::optional<rom::ErrorKind> kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const rom::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}
