#include "gsik/log.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace gsik {

std::shared_ptr<spdlog::logger> logger() {
  static std::once_flag once;
  static std::shared_ptr<spdlog::logger> instance;
  std::call_once(once, [] {
    instance = spdlog::stderr_color_mt("gsik");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("GSIK_LOG"); env != nullptr && *env != '\0') {
      level = spdlog::level::from_str(env);
    }
    instance->set_level(level);
  });
  return instance;
}

}  // namespace gsik
