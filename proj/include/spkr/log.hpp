#pragma once

#include <string>
#include <string_view>

namespace spkr::log {

enum class Level { Debug, Info, Warn, Error, Off };

// Reads SPKR_LOG_LEVEL on first use; CLI flags may override.
void set_level(Level level);
Level parse_level(std::string_view name);

void debug(const std::string& msg);
void info(const std::string& msg);
void warn(const std::string& msg);
void error(const std::string& msg);

}  // namespace spkr::log
