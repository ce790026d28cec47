#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace ghicast {

/// UTC instant with one-second resolution.
using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// Parses `YYYY-MM-DDTHH:MM:SSZ` (the trailing `Z` is optional, a space is
/// accepted in place of `T`). Throws ParseError.
Timestamp parse_iso8601(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(Timestamp t);

/// Compact form `YYYYMMDDHHMMSS`, the default image file stem.
std::string format_compact(Timestamp t);

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour, int minute, int second);

Timestamp floor_to_minute(Timestamp t);

int utc_year(Timestamp t);

/// Hour of day [0, 24) after shifting by a fixed UTC offset.
int local_hour(Timestamp t, int utc_offset_minutes);

/// Fractional local hour of day, e.g. 12.5 for 12:30.
double local_hour_fraction(Timestamp t, int utc_offset_minutes);

} // namespace ghicast
