#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace odsaudit {

// Naive local date-time at second precision. Change-tracking dates carry no
// zone, so the clock epoch is only used for ordering and calendar math.
using Timestamp = std::chrono::sys_seconds;
using CalendarDate = std::chrono::sys_days;

// Accepts "YYYY-MM-DDTHH:MM:SS" with optional fractional seconds and an
// optional trailing "Z"; a space may replace the "T".
std::optional<Timestamp> parse_timestamp(std::string_view text);

// Accepts "YYYY-MM-DD".
std::optional<CalendarDate> parse_date(std::string_view text);

CalendarDate date_of(Timestamp ts);

std::string format_date(CalendarDate date);
std::string format_time(Timestamp ts);
// "YYYY-MM-DDTHH:MM:SS"
std::string format_timestamp(Timestamp ts);

}  // namespace odsaudit
