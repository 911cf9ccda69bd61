#pragma once

#include <string>

namespace dgc {

// Process-wide log level, initialized once from the DGC_LOG environment
// variable (quiet|info|debug; default info). Messages go to stderr.
enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level();
void set_log_level(LogLevel level);

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

} // namespace dgc
