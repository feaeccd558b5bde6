// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/log.hpp"

#include <iostream>
#include <mutex>

namespace nlsdecay {
namespace {

std::mutex sink_mutex;

LogSink& current_sink() {
  static LogSink sink = [](LogLevel level, const std::string& message) {
    if (level == LogLevel::kWarning) std::cerr << "warning: " << message << '\n';
  };
  return sink;
}

}  // namespace

void set_log_sink(LogSink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex);
  current_sink() = std::move(sink);
}

void log_message(LogLevel level, const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex);
  if (current_sink()) current_sink()(level, message);
}

}  // namespace nlsdecay
