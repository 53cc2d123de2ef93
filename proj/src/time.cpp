#include "des/time.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace des {

namespace {

using namespace std::chrono;

bool read_digits(std::string_view text, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    value = value * 10 + (text[i] - '0');
  }
  out = value;
  return true;
}

// Parses "YYYY-MM-DDTHH:MM:SS" at the start of `text`.
std::optional<sys_seconds> parse_date_time(std::string_view text) {
  int y, mo, d, h, mi, s;
  if (text.size() < 19) return std::nullopt;
  if (!read_digits(text, 0, 4, y) || text[4] != '-' || !read_digits(text, 5, 2, mo) ||
      text[7] != '-' || !read_digits(text, 8, 2, d) || (text[10] != 'T' && text[10] != 't') ||
      !read_digits(text, 11, 2, h) || text[13] != ':' || !read_digits(text, 14, 2, mi) ||
      text[16] != ':' || !read_digits(text, 17, 2, s)) {
    return std::nullopt;
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

}  // namespace

std::optional<TimePoint> parse_timestamp(std::string_view text) {
  if (text.size() != 24 || text[19] != '.' || text[23] != 'Z' || text[10] != 'T') {
    return std::nullopt;
  }
  auto base = parse_date_time(text);
  int ms;
  if (!base || !read_digits(text, 20, 3, ms)) return std::nullopt;
  return TimePoint{time_point_cast<milliseconds>(*base) + milliseconds{ms}};
}

bool is_wire_timestamp(std::string_view text) { return parse_timestamp(text).has_value(); }

std::string format_timestamp(TimePoint tp) {
  auto day_point = floor<days>(tp);
  year_month_day ymd{day_point};
  hh_mm_ss hms{tp - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()), static_cast<int>(hms.subseconds().count()));
  return buf;
}

std::optional<TimePoint> parse_rfc3339_lenient(std::string_view text) {
  auto base = parse_date_time(text);
  if (!base) return std::nullopt;
  std::size_t pos = 19;
  int ms = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (digits < 3) ms = ms * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (std::size_t i = digits; i < 3; ++i) ms *= 10;
  }
  if (pos >= text.size()) return std::nullopt;
  minutes offset{0};
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    int oh, om;
    if (!read_digits(text, pos + 1, 2, oh) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
        !read_digits(text, pos + 4, 2, om)) {
      return std::nullopt;
    }
    offset = hours{oh} + minutes{om};
    if (text[pos] == '-') offset = -offset;
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;
  return TimePoint{time_point_cast<milliseconds>(*base) + milliseconds{ms} - offset};
}

TimePoint now_ms() { return time_point_cast<milliseconds>(system_clock::now()); }

std::optional<IsoDuration> parse_iso_duration(std::string_view text) {
  if (text.size() < 3 || text[0] != 'P') return std::nullopt;
  IsoDuration d;
  bool in_time = false;
  bool any = false;
  std::size_t pos = 1;
  while (pos < text.size()) {
    if (text[pos] == 'T') {
      if (in_time) return std::nullopt;
      in_time = true;
      ++pos;
      continue;
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr == text.data() + pos || value < 0) return std::nullopt;
    pos = static_cast<std::size_t>(ptr - text.data());
    if (pos >= text.size()) return std::nullopt;
    char unit = text[pos++];
    any = true;
    if (!in_time) {
      switch (unit) {
        case 'Y': d.years = value; break;
        case 'M': d.months = value; break;
        case 'W': d.weeks = value; break;
        case 'D': d.days = value; break;
        default: return std::nullopt;
      }
    } else {
      switch (unit) {
        case 'H': d.hours = value; break;
        case 'M': d.minutes = value; break;
        case 'S': d.seconds = value; break;
        default: return std::nullopt;
      }
    }
  }
  if (!any || text.back() == 'T') return std::nullopt;
  return d;
}

TimePoint add_duration(TimePoint from, const IsoDuration& d) {
  auto day_point = floor<days>(from);
  auto time_of_day = from - day_point;
  year_month_day ymd{day_point};
  auto ym = year_month{ymd.year(), ymd.month()} + years{d.years} + months{d.months};
  auto last = year_month_day_last{ym.year(), month_day_last{ym.month()}}.day();
  auto dd = ymd.day() > last ? last : ymd.day();
  sys_days shifted{year_month_day{ym.year(), ym.month(), dd}};
  shifted += days{d.days + 7 * d.weeks};
  return TimePoint{shifted + time_of_day} + hours{d.hours} + minutes{d.minutes} + seconds{d.seconds};
}

bool duration_at_least(const IsoDuration& d, const IsoDuration& minimum, TimePoint anchor) {
  return add_duration(anchor, d) >= add_duration(anchor, minimum);
}

}  // namespace des
