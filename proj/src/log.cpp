#include "laco/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <string_view>

namespace laco {

namespace {

LogLevel from_env() {
  const char* v = std::getenv("LACO_LOG");
  if (!v) return LogLevel::warn;
  const std::string_view s(v);
  if (s == "quiet" || s == "0") return LogLevel::quiet;
  if (s == "error" || s == "1") return LogLevel::error;
  if (s == "warn" || s == "2") return LogLevel::warn;
  if (s == "info" || s == "3") return LogLevel::info;
  if (s == "debug" || s == "4") return LogLevel::debug;
  std::fprintf(stderr, "laco: ignoring unrecognized LACO_LOG=%s\n", v);
  return LogLevel::warn;
}

std::atomic<int>& level_slot() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_slot().load()); }

void set_log_level(LogLevel level) { level_slot().store(static_cast<int>(level)); }

void log(LogLevel level, const std::string& message) {
  if (level == LogLevel::quiet || static_cast<int>(level) > level_slot().load()) return;
  static constexpr const char* kNames[] = {"", "error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] %s\n", kNames[static_cast<int>(level)], message.c_str());
}

}  // namespace laco
