#pragma once

#include <string>

namespace wavemgt::experiments {

/// Reads WAVEMGT_LOG (error | info | debug; default info). Unknown values
/// fall back to info with a warning.
void init_logging();

void log_debug(const std::string& msg);
void log_info(const std::string& msg);
void log_error(const std::string& msg);

}  // namespace wavemgt::experiments
