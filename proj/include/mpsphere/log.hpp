#pragma once

#include <string>

namespace mps {

enum class LogLevel { Debug = 0, Info = 1, Warning = 2, Error = 3, Silent = 4 };

void setLogLevel(LogLevel level);
LogLevel logLevel();
void logMessage(LogLevel level, const std::string& msg);

inline void logInfo(const std::string& msg) { logMessage(LogLevel::Info, msg); }
inline void logWarning(const std::string& msg) { logMessage(LogLevel::Warning, msg); }

}  // namespace mps
