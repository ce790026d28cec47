#include "ghicast/time.hpp"

#include "ghicast/error.hpp"

#include <charconv>
#include <cstdio>

namespace ghicast {

const char* category_name(ErrorCategory category) noexcept
{
    switch (category) {
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::empty_input: return "empty_input";
    case ErrorCategory::config: return "config";
    case ErrorCategory::shape: return "shape";
    case ErrorCategory::decode: return "decode";
    case ErrorCategory::undefined_metric: return "undefined_metric";
    case ErrorCategory::empty_report: return "empty_report";
    case ErrorCategory::incompatible: return "incompatible";
    case ErrorCategory::checksum: return "checksum";
    }
    return "unknown";
}

namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len)
{
    if (pos + len > text.size()) {
        throw ParseError("timestamp too short: '" + std::string(text) + "'");
    }
    int value = 0;
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw ParseError("bad timestamp field in '" + std::string(text) + "'");
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, std::string_view allowed)
{
    if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
        throw ParseError("malformed timestamp '" + std::string(text) + "'");
    }
}

} // namespace

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour, int minute, int second)
{
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok() || hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 60) {
        throw ParseError("invalid calendar date/time");
    }
    return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

Timestamp parse_iso8601(std::string_view text)
{
    // YYYY-MM-DDTHH:MM:SS[Z]
    expect_char(text, 4, "-");
    expect_char(text, 7, "-");
    expect_char(text, 10, "T ");
    expect_char(text, 13, ":");
    expect_char(text, 16, ":");
    if (text.size() != 19 && !(text.size() == 20 && text[19] == 'Z')) {
        throw ParseError("malformed timestamp '" + std::string(text) + "'");
    }
    return make_timestamp(parse_field(text, 0, 4), static_cast<unsigned>(parse_field(text, 5, 2)),
        static_cast<unsigned>(parse_field(text, 8, 2)), parse_field(text, 11, 2), parse_field(text, 14, 2),
        parse_field(text, 17, 2));
}

namespace {

struct Civil {
    int year;
    unsigned month, day;
    long hour, minute, second;
};

Civil to_civil(Timestamp t)
{
    using namespace std::chrono;
    const auto day_start = floor<days>(t);
    const year_month_day ymd{day_start};
    const hh_mm_ss hms{t - day_start};
    return {int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()), hms.hours().count(),
        hms.minutes().count(), hms.seconds().count()};
}

} // namespace

std::string format_iso8601(Timestamp t)
{
    const Civil c = to_civil(t);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", c.year, c.month, c.day, c.hour, c.minute,
        c.second);
    return buf;
}

std::string format_compact(Timestamp t)
{
    const Civil c = to_civil(t);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d%02u%02u%02ld%02ld%02ld", c.year, c.month, c.day, c.hour, c.minute,
        c.second);
    return buf;
}

Timestamp floor_to_minute(Timestamp t)
{
    return std::chrono::floor<std::chrono::minutes>(t);
}

int utc_year(Timestamp t)
{
    return to_civil(t).year;
}

int local_hour(Timestamp t, int utc_offset_minutes)
{
    return to_civil(t + std::chrono::minutes{utc_offset_minutes}).hour;
}

double local_hour_fraction(Timestamp t, int utc_offset_minutes)
{
    const Civil c = to_civil(t + std::chrono::minutes{utc_offset_minutes});
    return static_cast<double>(c.hour) + static_cast<double>(c.minute) / 60.0 + static_cast<double>(c.second) / 3600.0;
}

} // namespace ghicast
