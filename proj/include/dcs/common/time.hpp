#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace dcs {

/// All timestamps are integer microseconds since the Unix epoch, UTC.
using Duration = std::chrono::microseconds;
using Timestamp = std::chrono::sys_time<Duration>;
using Day = std::chrono::sys_days;

inline constexpr Duration kOneDay = std::chrono::days{1};

constexpr Timestamp from_micros(std::int64_t us) { return Timestamp{Duration{us}}; }
constexpr std::int64_t to_micros(Timestamp ts) { return ts.time_since_epoch().count(); }

/// UTC calendar day containing `ts` (floor, also for pre-epoch values).
constexpr Day day_of(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }
constexpr Timestamp day_start(Day d) { return Timestamp{d}; }
constexpr Timestamp day_end(Day d) { return Timestamp{d} + kOneDay; }

/// Floor of `ts` on a grid of `width` anchored at the Unix epoch.
Timestamp align_down(Timestamp ts, Duration width);

/// `2024-05-01T12:00:00.000000Z`; always 27 characters for years 0000..9999.
std::string format_iso(Timestamp ts);
/// `2024-05-01`
std::string format_date(Day d);

/// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS[.f{1,6}]]` with optional `Z`
/// or `+00:00` suffix. A space may replace `T`. Throws ParseError.
Timestamp parse_iso(std::string_view text);
Day parse_date(std::string_view text);

/// Durations like `90s`, `30m`, `24h`, `7d`, `1h30m`, `500ms`, `250us`.
/// A bare integer is seconds.
Duration parse_duration(std::string_view text);
std::string format_duration(Duration d);

/// Half-open time window [lo, hi).
struct TimeRange {
  Timestamp lo;
  Timestamp hi;

  bool valid() const { return lo < hi; }
  bool contains(Timestamp t) const { return lo <= t && t < hi; }
  /// True if the closed interval [first, last] shares a point with [lo, hi).
  bool overlaps_closed(Timestamp first, Timestamp last) const { return first < hi && last >= lo; }

  friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

}  // namespace dcs
