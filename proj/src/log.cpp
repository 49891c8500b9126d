#include "dgad/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace dgad::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink = [](Level level, const std::string& message) {
    if (level == Level::kWarning) std::cerr << "warning: " << message << '\n';
  };
  return sink;
}

std::atomic<std::size_t> g_warnings{0};

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  Sink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void emit(Level level, const std::string& message) {
  if (level == Level::kWarning) ++g_warnings;
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (current_sink()) current_sink()(level, message);
}

std::size_t warning_count() { return g_warnings.load(); }

}  // namespace dgad::log
