#include "bf3d/log.h"

#include <iostream>
#include <mutex>
#include <utility>

namespace bf3d {
namespace {

std::mutex& SinkMutex() {
  static std::mutex mu;
  return mu;
}

void DefaultSink(LogLevel level, std::string_view message) {
  if (level == LogLevel::kWarning) std::cerr << "WARNING: " << message << '\n';
}

LogSink& Sink() {
  static LogSink sink = DefaultSink;
  return sink;
}

void Emit(LogLevel level, std::string_view message) {
  std::lock_guard<std::mutex> lock(SinkMutex());
  if (Sink()) Sink()(level, message);
}

}  // namespace

LogSink SetLogSink(LogSink sink) {
  std::lock_guard<std::mutex> lock(SinkMutex());
  return std::exchange(Sink(), sink ? std::move(sink) : LogSink(DefaultSink));
}

void LogWarning(std::string_view message) { Emit(LogLevel::kWarning, message); }
void LogInfo(std::string_view message) { Emit(LogLevel::kInfo, message); }

}  // namespace bf3d
