// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

namespace nlsdecay {

enum class LogLevel { kDebug, kInfo, kWarning };

using LogSink = std::function<void(LogLevel, const std::string&)>;

// Replaces the process-wide sink; the default prints warnings to stderr.
void set_log_sink(LogSink sink);
void log_message(LogLevel level, const std::string& message);

}  // namespace nlsdecay
