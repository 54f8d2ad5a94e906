#pragma once

#include <string>

namespace shadow {

// Current time as ISO-8601 UTC ("2026-08-10T12:00:00Z").
// When SHADOW_FIXED_CLOCK is set it is returned verbatim, which makes
// event logs byte-reproducible for tests and fixtures.
std::string now_iso8601();

}  // namespace shadow
