#include "dcs/common/time.hpp"

#include <charconv>
#include <cstdio>

#include "dcs/common/error.hpp"

namespace dcs {

namespace {

using namespace std::chrono;

int parse_fixed(std::string_view text, std::size_t pos, std::size_t width, std::string_view whole) {
  if (pos + width > text.size()) throw ParseError("truncated timestamp '" + std::string(whole) + "'");
  int value = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') throw ParseError("bad digit in timestamp '" + std::string(whole) + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (pos >= text.size() || text[pos] != c)
    throw ParseError("expected '" + std::string(1, c) + "' in timestamp '" + std::string(whole) + "'");
}

Day make_day(int y, int m, int d, std::string_view whole) {
  year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(whole) + "'");
  return sys_days{ymd};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Timestamp align_down(Timestamp ts, Duration width) {
  std::int64_t us = to_micros(ts);
  std::int64_t w = width.count();
  std::int64_t q = us / w;
  if (us % w != 0 && us < 0) --q;
  return from_micros(q * w);
}

std::string format_date(Day d) {
  year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_iso(Timestamp ts) {
  Day d = day_of(ts);
  std::int64_t in_day = to_micros(ts) - to_micros(day_start(d));
  std::int64_t secs = in_day / 1'000'000;
  std::int64_t frac = in_day % 1'000'000;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lld.%06lldZ", format_date(d).c_str(),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60), static_cast<long long>(frac));
  return buf;
}

Day parse_date(std::string_view text) {
  std::string_view s = trim(text);
  if (s.size() != 10) throw ParseError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  int y = parse_fixed(s, 0, 4, text);
  expect(s, 4, '-', text);
  int m = parse_fixed(s, 5, 2, text);
  expect(s, 7, '-', text);
  int d = parse_fixed(s, 8, 2, text);
  return make_day(y, m, d, text);
}

Timestamp parse_iso(std::string_view text) {
  std::string_view s = trim(text);
  if (s.size() < 10) throw ParseError("timestamp too short: '" + std::string(text) + "'");
  Day day = parse_date(s.substr(0, 10));
  if (s.size() == 10) return day_start(day);
  if (s[10] != 'T' && s[10] != ' ') throw ParseError("expected 'T' in timestamp '" + std::string(text) + "'");
  std::size_t pos = 11;
  int hh = parse_fixed(s, pos, 2, text);
  expect(s, pos + 2, ':', text);
  int mm = parse_fixed(s, pos + 3, 2, text);
  pos += 5;
  int ss = 0;
  std::int64_t frac_us = 0;
  if (pos < s.size() && s[pos] == ':') {
    ss = parse_fixed(s, pos + 1, 2, text);
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      std::size_t digits = 0;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        if (digits == 6) throw ParseError("more than microsecond precision in '" + std::string(text) + "'");
        frac_us = frac_us * 10 + (s[pos] - '0');
        ++digits;
        ++pos;
      }
      if (digits == 0) throw ParseError("empty fraction in '" + std::string(text) + "'");
      for (; digits < 6; ++digits) frac_us *= 10;
    }
  }
  std::string_view zone = s.substr(pos);
  if (!(zone.empty() || zone == "Z" || zone == "+00:00" || zone == "+0000"))
    throw ParseError("only UTC timestamps are accepted: '" + std::string(text) + "'");
  if (hh > 23 || mm > 59 || ss > 59) throw ParseError("time of day out of range in '" + std::string(text) + "'");
  return day_start(day) + hours{hh} + minutes{mm} + seconds{ss} + Duration{frac_us};
}

Duration parse_duration(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) throw ParseError("empty duration");
  bool negative = false;
  if (s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  Duration total{0};
  bool any = false;
  while (!s.empty()) {
    std::int64_t n = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc{}) throw ParseError("bad duration '" + std::string(text) + "'");
    s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
    std::size_t unit_len = 0;
    while (unit_len < s.size() && s[unit_len] >= 'a' && s[unit_len] <= 'z') ++unit_len;
    std::string_view unit = s.substr(0, unit_len);
    s.remove_prefix(unit_len);
    if (unit.empty() && !any && s.empty()) unit = "s";
    if (unit == "us") total += Duration{n};
    else if (unit == "ms") total += milliseconds{n};
    else if (unit == "s") total += seconds{n};
    else if (unit == "m") total += minutes{n};
    else if (unit == "h") total += hours{n};
    else if (unit == "d") total += days{n};
    else if (unit == "w") total += weeks{n};
    else throw ParseError("unknown duration unit in '" + std::string(text) + "'");
    any = true;
  }
  return negative ? -total : total;
}

std::string format_duration(Duration d) {
  std::int64_t us = d.count();
  if (us == 0) return "0s";
  std::string out;
  if (us < 0) {
    out = "-";
    us = -us;
  }
  struct Unit {
    std::int64_t size;
    const char* name;
  };
  static constexpr Unit units[] = {{86'400'000'000LL, "d"}, {3'600'000'000LL, "h"}, {60'000'000LL, "m"},
                                   {1'000'000LL, "s"},      {1'000LL, "ms"},         {1LL, "us"}};
  for (const auto& u : units) {
    if (us >= u.size) {
      out += std::to_string(us / u.size) + u.name;
      us %= u.size;
    }
  }
  return out;
}

}  // namespace dcs
