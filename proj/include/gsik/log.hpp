#pragma once

#include <memory>

namespace spdlog {
class logger;
}

namespace gsik {

/// Library logger. The level comes from the GSIK_LOG environment variable
/// (trace, debug, info, warn, error, off); the default is warn.
std::shared_ptr<spdlog::logger> logger();

}  // namespace gsik
