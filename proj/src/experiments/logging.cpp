#include "wavemgt/experiments/logging.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace wavemgt::experiments {

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("wavemgt");
    l->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    return l;
  }();
  return log;
}

}  // namespace

void init_logging() {
  const char* env = std::getenv("WAVEMGT_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    logger()->set_level(spdlog::level::err);
  } else if (level == "debug") {
    logger()->set_level(spdlog::level::debug);
  } else {
    logger()->set_level(spdlog::level::info);
    if (level != "info") logger()->warn("unknown WAVEMGT_LOG value '{}', using info", level);
  }
}

void log_debug(const std::string& msg) { logger()->debug(msg); }
void log_info(const std::string& msg) { logger()->info(msg); }
void log_error(const std::string& msg) { logger()->error(msg); }

}  // namespace wavemgt::experiments
