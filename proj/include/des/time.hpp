#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace des {

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;

// Wire timestamps are RFC 3339 UTC with exactly millisecond precision and a
// trailing 'Z', e.g. 2026-03-01T12:00:00.000Z. Anything else is rejected.
std::optional<TimePoint> parse_timestamp(std::string_view text);
bool is_wire_timestamp(std::string_view text);
std::string format_timestamp(TimePoint tp);

// Accepts any RFC 3339 form (arbitrary fractional digits, numeric offsets)
// and normalizes to UTC, truncating to milliseconds. Used when importing
// foreign logs, never when parsing events.
std::optional<TimePoint> parse_rfc3339_lenient(std::string_view text);

TimePoint now_ms();

// ISO 8601 duration (PnYnMnWnDTnHnMnS, integer components only).
struct IsoDuration {
  int years = 0;
  int months = 0;
  int weeks = 0;
  int days = 0;
  int hours = 0;
  int minutes = 0;
  int seconds = 0;

  friend bool operator==(const IsoDuration&, const IsoDuration&) = default;
};

std::optional<IsoDuration> parse_iso_duration(std::string_view text);

// Calendar-aware addition: months and years clamp to the end of month.
TimePoint add_duration(TimePoint from, const IsoDuration& d);

// True when `d` spans at least `minimum` when both are anchored at `anchor`.
bool duration_at_least(const IsoDuration& d, const IsoDuration& minimum, TimePoint anchor);

}  // namespace des
