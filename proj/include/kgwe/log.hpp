#pragma once

#include <spdlog/spdlog.h>

namespace kgwe {

// Applies the KGWE_LOG environment variable (trace, debug, info, warn, error,
// critical, off) to the default logger. Unset means "info".
void configure_logging();

}  // namespace kgwe
