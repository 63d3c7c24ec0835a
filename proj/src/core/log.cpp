#include "spkr/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>

#include "spkr/error.hpp"

namespace spkr::log {

namespace {

spdlog::level::level_enum to_spd(Level level) {
  switch (level) {
    case Level::Debug: return spdlog::level::debug;
    case Level::Info: return spdlog::level::info;
    case Level::Warn: return spdlog::level::warn;
    case Level::Error: return spdlog::level::err;
    case Level::Off: return spdlog::level::off;
  }
  return spdlog::level::info;
}

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_st("spkr");
    l->set_pattern("[%l] %v");
    Level level = Level::Warn;
    if (const char* env = std::getenv("SPKR_LOG_LEVEL")) {
      try {
        level = parse_level(env);
      } catch (const Error&) {
      }
    }
    l->set_level(to_spd(level));
    return l;
  }();
  return *instance;
}

}  // namespace

void set_level(Level level) { logger().set_level(to_spd(level)); }

Level parse_level(std::string_view name) {
  if (name == "debug") return Level::Debug;
  if (name == "info") return Level::Info;
  if (name == "warn" || name == "warning") return Level::Warn;
  if (name == "error") return Level::Error;
  if (name == "off") return Level::Off;
  fail(Errc::InvalidArgument, "unknown log level '" + std::string(name) + "'");
}

void debug(const std::string& msg) { logger().debug(msg); }
void info(const std::string& msg) { logger().info(msg); }
void warn(const std::string& msg) { logger().warn(msg); }
void error(const std::string& msg) { logger().error(msg); }

}  // namespace spkr::log
