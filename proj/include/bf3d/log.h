#ifndef BF3D_LOG_H_
#define BF3D_LOG_H_

#include <functional>
#include <string_view>

namespace bf3d {

enum class LogLevel { kInfo, kWarning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Replaces the process-wide sink and returns the previous one. The default
// sink writes warnings to stderr and drops info messages.
LogSink SetLogSink(LogSink sink);

void LogWarning(std::string_view message);
void LogInfo(std::string_view message);

}  // namespace bf3d

#endif  // BF3D_LOG_H_
