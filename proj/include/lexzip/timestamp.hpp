#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace lexzip {

using Timestamp = std::chrono::sys_seconds;

/// Formats as ISO-8601 UTC, e.g. "2019-05-01T00:00:00Z".
std::string format_timestamp(Timestamp t);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with an optional "Z" suffix or
/// "+HH:MM"/"-HH:MM" offset. Throws Error(Parse) otherwise.
Timestamp parse_timestamp(std::string_view text);

}  // namespace lexzip
