#include "xwalk/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace xwalk {
namespace {

LogLevel read_level_from_env() {
  const char* env = std::getenv("XWALK_LOG");
  if (env == nullptr) return LogLevel::Info;
  const std::string v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  if (v == "warn") return LogLevel::Warn;
  std::fprintf(stderr, "[warn] unknown XWALK_LOG value '%s', using info\n",
               env);
  return LogLevel::Info;
}

LogLevel min_level() {
  static const LogLevel level = read_level_from_env();
  return level;
}

const char* tag(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
  }
  return "?";
}

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

bool log_enabled(LogLevel level) {
  return static_cast<int>(level) >= static_cast<int>(min_level());
}

void log(LogLevel level, const std::string& message) {
  if (!log_enabled(level)) return;
  std::lock_guard<std::mutex> lock(log_mutex());
  std::fprintf(stderr, "[%s] %s\n", tag(level), message.c_str());
}

}  // namespace xwalk
