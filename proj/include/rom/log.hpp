#pragma once

#include <string_view>

namespace rom {

enum class LogLevel { quiet, warning, info };

/// Messages go to stderr, one line each, prefixed with their level.
void set_log_level(LogLevel level) noexcept;
LogLevel log_level() noexcept;
void log_warning(std::string_view message);
void log_info(std::string_view message);

}  // namespace rom
