#pragma once

#include <functional>
#include <string>

namespace dgad::log {

enum class Level { kDebug, kInfo, kWarning };

using Sink = std::function<void(Level, const std::string&)>;

// Replaces the process-wide sink and returns the previous one. The default
// sink writes warnings to stderr and drops info/debug output.
Sink set_sink(Sink sink);

void emit(Level level, const std::string& message);
inline void warn(const std::string& message) { emit(Level::kWarning, message); }
inline void info(const std::string& message) { emit(Level::kInfo, message); }

// Number of warnings emitted since process start, regardless of sink.
std::size_t warning_count();

}  // namespace dgad::log
