#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace safespeed {

// Parses "YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+HH:MM|-HH:MM|+HHMM|-HHMM]" to epoch
// seconds. Timestamps without an offset are taken as UTC; offsets are folded
// in so the result is always UTC. Returns nullopt on malformed input.
std::optional<std::int64_t> parse_iso8601(const std::string& text);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601_utc(std::int64_t epoch_sec);

// Same instant rendered in a fixed UTC offset, e.g. -240 -> "...-04:00".
std::string format_iso8601_offset(std::int64_t epoch_sec, int offset_minutes);

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

}  // namespace safespeed
