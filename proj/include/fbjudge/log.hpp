/// @file log.hpp
/// @brief Process-wide warning channel.

#pragma once

#include <functional>
#include <string>

namespace fbjudge {

using WarningHandler = std::function<void(const std::string&)>;

/// Replaces the handler and returns the previous one. The default writes
/// "warning: <msg>" to stderr. Handlers may be called from worker threads
/// but never concurrently.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace fbjudge
