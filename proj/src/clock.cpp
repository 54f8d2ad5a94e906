#include "shadow/clock.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>

namespace shadow {

std::string now_iso8601() {
  if (const char* fixed = std::getenv("SHADOW_FIXED_CLOCK"); fixed && *fixed) {
    return fixed;
  }
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace shadow
