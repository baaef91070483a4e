#pragma once

#include <string>

namespace laco {

enum class LogLevel { quiet = 0, error = 1, warn = 2, info = 3, debug = 4 };

// Read once from LACO_LOG (quiet|error|warn|info|debug or 0-4); default warn.
LogLevel log_level();
void set_log_level(LogLevel level);
void log(LogLevel level, const std::string& message);

}  // namespace laco
