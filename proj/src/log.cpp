#include "dgc/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace dgc {

namespace {

LogLevel initial_level() {
  const char* env = std::getenv("DGC_LOG");
  if (env == nullptr) return LogLevel::Info;
  if (std::strcmp(env, "quiet") == 0) return LogLevel::Quiet;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Info;
}

LogLevel& level_ref() {
  static LogLevel level = initial_level();
  return level;
}

} // namespace

LogLevel log_level() { return level_ref(); }
void set_log_level(LogLevel level) { level_ref() = level; }

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::fprintf(stderr, "[dgc] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::fprintf(stderr, "[dgc:debug] %s\n", msg.c_str());
}

} // namespace dgc
