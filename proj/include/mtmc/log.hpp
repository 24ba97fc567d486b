#pragma once

#include <cstdlib>
#include <iostream>
#include <string_view>

namespace mtmc::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Threshold from MTMC_LOG_LEVEL (error|warn|info|debug), default warn.
inline Level threshold() {
    const char* env = std::getenv("MTMC_LOG_LEVEL");
    const std::string_view v = env ? env : "";
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}

inline void write(Level level, std::string_view message, std::ostream& sink = std::cerr) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    static constexpr std::string_view tags[] = {"error", "warn", "info", "debug"};
    sink << "mtmc " << tags[static_cast<int>(level)] << ": " << message << '\n';
}

inline void error(std::string_view m, std::ostream& sink = std::cerr) { write(Level::error, m, sink); }
inline void warn(std::string_view m, std::ostream& sink = std::cerr) { write(Level::warn, m, sink); }
inline void info(std::string_view m, std::ostream& sink = std::cerr) { write(Level::info, m, sink); }
inline void debug(std::string_view m, std::ostream& sink = std::cerr) { write(Level::debug, m, sink); }

} // namespace mtmc::log
