#include "safespeed/time_utils.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace safespeed {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Reads exactly n digits starting at s[pos]; advances pos on success.
bool read_digits(const std::string& s, std::size_t& pos, int n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (int i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (!is_digit(c)) return false;
    v = v * 10 + (c - '0');
  }
  pos += static_cast<std::size_t>(n);
  out = v;
  return true;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> days = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return days[m - 1];
}

}  // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  // Howard Hinnant's algorithm.
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::optional<std::int64_t> parse_iso8601(const std::string& text) {
  std::size_t pos = 0;
  int year, month, day, hour, minute, second;
  if (!read_digits(text, pos, 4, year)) return std::nullopt;
  if (pos >= text.size() || text[pos] != '-') return std::nullopt;
  ++pos;
  if (!read_digits(text, pos, 2, month)) return std::nullopt;
  if (pos >= text.size() || text[pos] != '-') return std::nullopt;
  ++pos;
  if (!read_digits(text, pos, 2, day)) return std::nullopt;
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != ' ')) return std::nullopt;
  ++pos;
  if (!read_digits(text, pos, 2, hour)) return std::nullopt;
  if (pos >= text.size() || text[pos] != ':') return std::nullopt;
  ++pos;
  if (!read_digits(text, pos, 2, minute)) return std::nullopt;
  if (pos >= text.size() || text[pos] != ':') return std::nullopt;
  ++pos;
  if (!read_digits(text, pos, 2, second)) return std::nullopt;

  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) return std::nullopt;
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
  if (second == 60) second = 59;  // fold leap seconds

  // Fractional seconds are accepted and truncated.
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    if (pos >= text.size() || !is_digit(text[pos])) return std::nullopt;
    while (pos < text.size() && is_digit(text[pos])) ++pos;
  }

  std::int64_t offset_sec = 0;
  if (pos < text.size()) {
    char c = text[pos];
    if (c == 'Z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      ++pos;
      int oh, om = 0;
      if (!read_digits(text, pos, 2, oh)) return std::nullopt;
      if (pos < text.size() && text[pos] == ':') ++pos;
      if (pos < text.size() && is_digit(text[pos])) {
        if (!read_digits(text, pos, 2, om)) return std::nullopt;
      }
      if (oh > 14 || om > 59) return std::nullopt;
      offset_sec = (static_cast<std::int64_t>(oh) * 60 + om) * 60;
      if (c == '-') offset_sec = -offset_sec;
    } else {
      return std::nullopt;
    }
  }
  if (pos != text.size()) return std::nullopt;

  std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  std::int64_t local = days * 86400 + hour * 3600 + minute * 60 + second;
  return local - offset_sec;
}

namespace {

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

std::string format_parts(std::int64_t epoch_sec, const char* suffix) {
  std::int64_t days = epoch_sec / 86400;
  std::int64_t rem = epoch_sec % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d%s", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60), suffix);
  return std::string(buf);
}

}  // namespace

std::string format_iso8601_utc(std::int64_t epoch_sec) { return format_parts(epoch_sec, "Z"); }

std::string format_iso8601_offset(std::int64_t epoch_sec, int offset_minutes) {
  if (offset_minutes < -18 * 60 || offset_minutes > 18 * 60)
    throw std::invalid_argument("utc offset out of range: " + std::to_string(offset_minutes));
  char suffix[16];
  const int om = offset_minutes >= 0 ? offset_minutes : -offset_minutes;
  std::snprintf(suffix, sizeof(suffix), "%c%02d:%02d", offset_minutes >= 0 ? '+' : '-', om / 60,
                om % 60);
  return format_parts(epoch_sec + static_cast<std::int64_t>(offset_minutes) * 60, suffix);
}

}  // namespace safespeed
