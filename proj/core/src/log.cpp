#include "sg/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace sg::log {

namespace {
std::atomic<Level> g_level{Level::kWarn};
std::mutex g_mu;

const char* tag(Level l) {
  switch (l) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    case Level::kOff: break;
  }
  return "";
}
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level l, std::string_view message) {
  if (l < g_level.load()) return;
  std::lock_guard lock(g_mu);
  std::clog << "[" << tag(l) << "] " << message << '\n';
}

}  // namespace sg::log
