#include "mpsphere/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace mps {

namespace {
std::atomic<int> gLevel{static_cast<int>(LogLevel::Warning)};
std::mutex gMutex;

const char* tag(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warning: return "warning";
    case LogLevel::Error: return "error";
    default: return "";
  }
}
}  // namespace

void setLogLevel(LogLevel level) { gLevel = static_cast<int>(level); }

LogLevel logLevel() { return static_cast<LogLevel>(gLevel.load()); }

void logMessage(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) < gLevel.load() || level == LogLevel::Silent) return;
  std::lock_guard<std::mutex> lock(gMutex);
  std::cerr << "[" << tag(level) << "] " << msg << '\n';
}

}  // namespace mps
