#include <doctest.h>

#include <random>

#include "dcs/common/error.hpp"
#include "dcs/common/time.hpp"
#include "support/test_support.hpp"

using namespace dcs;
using namespace std::chrono_literals;
using test::ts_at;

TEST_CASE("iso formatting is fixed width and round-trips") {
  CHECK(format_iso(ts_at(2024, 5, 1, 12)) == "2024-05-01T12:00:00.000000Z");
  CHECK(format_iso(ts_at(2024, 5, 1) + 7us) == "2024-05-01T00:00:00.000007Z");
  CHECK(format_iso(from_micros(-1)) == "1969-12-31T23:59:59.999999Z");

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> d(to_micros(ts_at(1971, 1, 1)), to_micros(ts_at(2090, 1, 1)));
  for (int i = 0; i < 2000; ++i) {
    auto t = from_micros(d(rng));
    auto s = format_iso(t);
    REQUIRE(s.size() == 27);
    CHECK(parse_iso(s) == t);
  }
}

TEST_CASE("parse_iso accepts the documented variants") {
  auto t = ts_at(2024, 3, 2, 10, 30);
  CHECK(parse_iso("2024-03-02T10:30") == t);
  CHECK(parse_iso("2024-03-02 10:30:00") == t);
  CHECK(parse_iso("2024-03-02T10:30:00Z") == t);
  CHECK(parse_iso("2024-03-02T10:30:00+00:00") == t);
  CHECK(parse_iso("2024-03-02T10:30:00.5Z") == t + 500ms);
  CHECK(parse_iso("2024-03-02") == ts_at(2024, 3, 2));
  CHECK_THROWS_AS(parse_iso("2024-13-02"), ParseError);
  CHECK_THROWS_AS(parse_iso("2024-02-30"), ParseError);
  CHECK_THROWS_AS(parse_iso("2024-03-02T10:30:00+01:00"), ParseError);
  CHECK_THROWS_AS(parse_iso("yesterday"), ParseError);
  CHECK_THROWS_AS(parse_iso("2024-03-02T10:30:00.1234567"), ParseError);
}

TEST_CASE("day helpers") {
  auto t = ts_at(2024, 12, 31, 23, 59, 59);
  CHECK(format_date(day_of(t)) == "2024-12-31");
  CHECK(day_end(day_of(t)) == ts_at(2025, 1, 1));
  CHECK(day_of(from_micros(-1)) == test::day_at(1969, 12, 31));
  CHECK(parse_date("2024-02-29") == test::day_at(2024, 2, 29));
  CHECK_THROWS_AS(parse_date("2023-02-29"), ParseError);
}

TEST_CASE("align_down floors on an epoch-anchored grid") {
  CHECK(align_down(ts_at(2024, 1, 1, 13, 7), 1h) == ts_at(2024, 1, 1, 13));
  CHECK(align_down(ts_at(2024, 1, 1, 13, 7), 24h) == ts_at(2024, 1, 1));
  CHECK(align_down(from_micros(-1), 1s) == from_micros(-1'000'000));
  // brute-force oracle
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::int64_t> d(-1'000'000'000, 1'000'000'000);
  std::uniform_int_distribution<std::int64_t> w(1, 10'000'000);
  for (int i = 0; i < 1000; ++i) {
    auto t = d(rng);
    auto width = w(rng);
    auto a = to_micros(align_down(from_micros(t), Duration{width}));
    CHECK(a <= t);
    CHECK(t - a < width);
    CHECK(a % width == 0);
  }
}

TEST_CASE("durations") {
  CHECK(parse_duration("90s") == 90s);
  CHECK(parse_duration("1h30m") == 90min);
  CHECK(parse_duration("7d") == std::chrono::days{7});
  CHECK(parse_duration("500ms") == 500ms);
  CHECK(parse_duration("250us") == 250us);
  CHECK(parse_duration("45") == 45s);
  CHECK_THROWS_AS(parse_duration(""), ParseError);
  CHECK_THROWS_AS(parse_duration("5x"), ParseError);
  for (auto d : {Duration{1}, Duration{1500}, Duration{90s}, Duration{25min}, Duration{24h}, Duration{std::chrono::days{3} + 1s}})
    CHECK(parse_duration(format_duration(d)) == d);
}

TEST_CASE("TimeRange") {
  TimeRange r{ts_at(2024, 1, 1), ts_at(2024, 1, 2)};
  CHECK(r.valid());
  CHECK(r.contains(ts_at(2024, 1, 1)));
  CHECK_FALSE(r.contains(ts_at(2024, 1, 2)));
  CHECK(r.overlaps_closed(ts_at(2023, 12, 31), ts_at(2024, 1, 1)));
  CHECK_FALSE(r.overlaps_closed(ts_at(2024, 1, 2), ts_at(2024, 1, 3)));
  CHECK_FALSE((TimeRange{r.hi, r.lo}).valid());
}
