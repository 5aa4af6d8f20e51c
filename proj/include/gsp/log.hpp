#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace gsp::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Read once from GSP_LOG_LEVEL (debug|info|warn|error|off); default warn.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("GSP_LOG_LEVEL");
    if (env == nullptr) return Level::warn;
    const std::string_view v{env};
    if (v == "debug") return Level::debug;
    if (v == "info") return Level::info;
    if (v == "error") return Level::error;
    if (v == "off") return Level::off;
    return Level::warn;
  }();
  return level;
}

inline void write(Level level, std::string_view tag, const std::string& msg) {
  if (level < threshold()) return;
  std::cerr << "[gsp:" << tag << "] " << msg << '\n';
}

inline void debug(const std::string& msg) { write(Level::debug, "debug", msg); }
inline void info(const std::string& msg) { write(Level::info, "info", msg); }
inline void warn(const std::string& msg) { write(Level::warn, "warn", msg); }

}  // namespace gsp::log
