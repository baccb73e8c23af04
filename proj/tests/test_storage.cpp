#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "dcs/common/error.hpp"
#include "dcs/storage/column_file.hpp"
#include "dcs/storage/element_digest.hpp"
#include "dcs/storage/manifest.hpp"
#include "dcs/storage/scan.hpp"
#include "dcs/storage/table.hpp"
#include "support/test_support.hpp"

using namespace dcs;
using namespace dcs::storage;
using namespace std::chrono_literals;
using test::day_at;
using test::TempDir;
using test::ts_at;

namespace {

Watermark mark(std::optional<Timestamp> last = std::nullopt) { return Watermark{"t", last, 1h}; }

/// Commits `rows` (any days) as one version; returns the manifest.
Manifest commit_rows(const Table& table, const std::vector<EventRecord>& rows, WriteOptions opts = {}) {
  std::map<Day, std::vector<EventRecord>> by_day;
  for (const auto& r : rows) by_day[day_of(r.ts)].push_back(r);
  auto w = table.open_writer(opts);
  std::vector<PartitionMeta> changes;
  for (auto& [d, rs] : by_day) changes.push_back(w.write_partition(d, rs));
  return w.commit(table.current_version(), std::move(changes), mark());
}

std::vector<EventRecord> full_scan_oracle(const std::vector<EventRecord>& stored, TimeRange range,
                                          const std::optional<ValuePredicate>& value,
                                          const std::optional<ElementSet>& elements) {
  std::vector<EventRecord> out;
  for (const auto& r : stored) {
    if (!range.contains(r.ts)) continue;
    if (value && !value->matches(r.value)) continue;
    if (elements && !std::binary_search(elements->begin(), elements->end(), r.element_id)) continue;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("element digest matches a std::set oracle") {
  std::mt19937_64 rng(1);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<ElementId> ids;
    int n = std::uniform_int_distribution<int>(0, 60)(rng);
    for (int i = 0; i < n; ++i) ids.push_back(std::uniform_int_distribution<ElementId>(1, 80)(rng));
    std::set<ElementId> oracle(ids.begin(), ids.end());
    std::sort(ids.begin(), ids.end());
    auto d = ElementDigest::from_sorted(ids);
    CHECK(d.cardinality() == oracle.size());
    CHECK(d.expand() == std::vector<ElementId>(oracle.begin(), oracle.end()));
    for (ElementId id = 0; id < 90; ++id) CHECK(d.contains(id) == (oracle.count(id) == 1));
    ElementSet probe = make_element_set({std::uniform_int_distribution<ElementId>(1, 90)(rng),
                                         std::uniform_int_distribution<ElementId>(1, 90)(rng)});
    bool any = std::any_of(probe.begin(), probe.end(), [&](ElementId id) { return oracle.count(id) == 1; });
    CHECK(d.intersects(probe) == any);
    // ranges are disjoint and non-adjacent
    for (std::size_t i = 1; i < d.ranges().size(); ++i) CHECK(d.ranges()[i].first > d.ranges()[i - 1].second + 1);
  }
  CHECK(ElementDigest::from_ranges({{5, 9}, {10, 12}, {1, 2}}).ranges().size() == 2);
}

TEST_CASE("column file round trip across row groups") {
  TempDir dir;
  std::mt19937_64 rng(2);
  auto rows = test::map_dedup(test::random_records(rng, 5000, ts_at(2024, 5, 1), ts_at(2024, 5, 2), 40));
  auto stats = write_column_file(dir / "a.dcol", rows, {.row_group_rows = 700, .compression_level = 1});
  CHECK(stats.rows == rows.size());
  ColumnFileReader reader(dir / "a.dcol");
  CHECK(reader.row_groups().size() == (rows.size() + 699) / 700);
  CHECK(reader.row_count() == rows.size());
  CHECK(reader.read_all() == rows);
  auto b = reader.read_group(0, Projection{Field::element_id, Field::ts});
  CHECK(b.value.empty());
  CHECK(b.status.empty());
  CHECK(b.size() == 700);
  CHECK_FALSE(std::filesystem::exists(dir / "a.dcol.tmp"));
}

TEST_CASE("corrupt column files are rejected with the file name") {
  TempDir dir;
  std::mt19937_64 rng(4);
  auto rows = test::map_dedup(test::random_records(rng, 300, ts_at(2024, 5, 1), ts_at(2024, 5, 2), 10));
  write_column_file(dir / "c.dcol", rows);
  auto bytes = [&] {
    std::ifstream in(dir / "c.dcol", std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
  }();
  auto write = [&](const std::vector<char>& b) {
    std::ofstream out(dir / "c.dcol", std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  SUBCASE("flipped data byte") {
    auto b = bytes;
    b[20] ^= 0x5a;
    write(b);
    try {
      ColumnFileReader r(dir / "c.dcol");
      (void)r.read_all();
      FAIL("expected ScanError");
    } catch (const ScanError& e) {
      CHECK(std::string(e.what()).find("c.dcol") != std::string::npos);
    }
  }
  SUBCASE("truncated") {
    auto b = bytes;
    b.resize(b.size() / 2);
    write(b);
    CHECK_THROWS_AS(ColumnFileReader(dir / "c.dcol"), ScanError);
  }
  SUBCASE("not a column file") {
    write(std::vector<char>{'h', 'e', 'l', 'l', 'o'});
    CHECK_THROWS_AS(ColumnFileReader(dir / "c.dcol"), ScanError);
  }
}

TEST_CASE("write_partition") {
  TempDir dir;
  Table table(dir.path(), "t");
  auto w = table.open_writer();
  Day day = day_at(2024, 5, 1);

  SUBCASE("three distinct records") {
    std::vector<EventRecord> rs{{2, ts_at(2024, 5, 1, 3), 0.2, {}},
                                {1, ts_at(2024, 5, 1, 1), 0.1, std::int16_t{7}},
                                {1, ts_at(2024, 5, 1, 9), 0.3, {}}};
    auto p = w.write_partition(day, rs);
    CHECK(p.row_count == 3);
    CHECK(p.min_ts == ts_at(2024, 5, 1, 1));
    CHECK(p.max_ts == ts_at(2024, 5, 1, 9));
    CHECK(p.min_value == 0.1);
    CHECK(p.max_value == 0.3);
    REQUIRE(p.files.size() == 1);
    ColumnFileReader r(table.file_path(p.files[0]));
    auto back = r.read_all();
    REQUIRE(back.size() == 3);
    CHECK(back[0].element_id == 1);
    CHECK(back[0].status == std::int16_t{7});
    CHECK(std::is_sorted(back.begin(), back.end(), key_less));
  }
  SUBCASE("empty input writes no file") {
    auto p = w.write_partition(day, {});
    CHECK(p.row_count == 0);
    CHECK(p.files.empty());
    CHECK_FALSE(std::filesystem::exists(table.dir() / "date=2024-05-01"));
  }
  SUBCASE("duplicates collapse, last wins (hash-map oracle)") {
    std::mt19937_64 rng(7);
    auto rs = test::map_dedup(test::random_records(rng, 990, day_start(day), day_end(day), 50));
    while (rs.size() < 990) {
      auto extra = test::random_records(rng, 1, day_start(day), day_end(day), 50);
      if (std::none_of(rs.begin(), rs.end(), [&](const auto& r) { return same_key(r, extra[0]); })) rs.push_back(extra[0]);
    }
    std::shuffle(rs.begin(), rs.end(), rng);
    for (int i = 0; i < 10; ++i) {
      auto dup = rs[static_cast<std::size_t>(i * 37)];
      dup.value = 100.0 + i;  // later arrival, different value
      rs.push_back(dup);
    }
    REQUIRE(rs.size() == 1000);
    auto p = w.write_partition(day, rs);
    CHECK(p.row_count == 990);
    CHECK(ColumnFileReader(table.file_path(p.files[0])).read_all() == test::map_dedup(rs));
  }
  SUBCASE("records outside the day") {
    std::vector<EventRecord> rs{{1, ts_at(2024, 5, 2), 0.1, {}}};
    CHECK_THROWS_AS(w.write_partition(day, rs), PartitionBoundaryError);
    rs[0].ts = ts_at(2024, 5, 1) - 1us;
    CHECK_THROWS_AS(w.write_partition(day, rs), PartitionBoundaryError);
  }
}

TEST_CASE("manifest versions, snapshots and conflicts") {
  TempDir dir;
  Table table(dir.path(), "t");
  CHECK(table.current_version() == 0);
  CHECK(table.current()->partitions.empty());

  std::vector<EventRecord> day1{{1, ts_at(2024, 1, 1, 5), 0.2, {}}};
  std::vector<EventRecord> day2{{1, ts_at(2024, 1, 2, 5), 0.3, {}}};
  auto m1 = commit_rows(table, day1);
  CHECK(m1.version == 1);
  auto m2 = commit_rows(table, day2);
  CHECK(m2.version == 2);
  CHECK(table.at_version(1)->partitions.size() == 1);
  CHECK(table.current()->partitions.size() == 2);
  CHECK(*table.at_version(1) == m1);
  CHECK(table.committed_versions() == std::vector<std::uint64_t>{1, 2});
  CHECK_THROWS_AS(table.at_version(3), IoError);

  SUBCASE("stale base version") {
    auto w = table.open_writer();
    CHECK_THROWS_AS(w.commit(1, {}, mark()), CommitConflictError);
  }
  SUBCASE("second writer is refused") {
    auto w = table.open_writer();
    CHECK_THROWS_AS(table.open_writer(), CommitConflictError);
  }
  SUBCASE("watermark never goes back") {
    auto w = table.open_writer();
    w.commit(2, {}, mark(ts_at(2024, 1, 2)));
    CHECK_THROWS_AS(w.commit(3, {}, mark(ts_at(2024, 1, 1))), ValidationError);
  }
  SUBCASE("replace_all drops days not in the change set") {
    auto w = table.open_writer();
    auto p = w.write_partition(day_at(2024, 1, 3), std::vector<EventRecord>{{2, ts_at(2024, 1, 3), 1.0, {}}});
    auto m = w.commit(2, {p}, mark(), CommitMode::replace_all);
    CHECK(m.partitions.size() == 1);
    CHECK(m.partitions.begin()->first == day_at(2024, 1, 3));
  }
  SUBCASE("garbage collection keeps the newest versions readable") {
    auto w = table.open_writer();
    auto p = w.write_partition(day_at(2024, 1, 1), std::vector<EventRecord>{{9, ts_at(2024, 1, 1, 6), 1.0, {}}});
    auto m = w.commit(2, {p}, mark(), CommitMode::replace_all);
    auto removed = w.collect_garbage(1);
    CHECK(removed >= 2);  // manifests 1, 2 and the day-2 file
    CHECK(table.committed_versions() == std::vector<std::uint64_t>{3});
    auto [rows, stats] = scan_records(table, *table.current(), {.range = {ts_at(2024, 1, 1), ts_at(2024, 2, 1)}});
    CHECK(rows.size() == 1);
  }
}

TEST_CASE("manifest json round trip and validation") {
  Manifest m;
  m.version = 4;
  m.table = "t";
  DataStats s;
  s.rows = 2;
  s.min_ts = ts_at(2024, 1, 1, 1);
  s.max_ts = ts_at(2024, 1, 1, 2);
  s.min_value = -1.5;
  s.max_value = 0.25;
  s.elements = ElementDigest::from_ranges({{1, 3}, {7, 7}});
  m.partitions[day_at(2024, 1, 1)] =
      PartitionMeta::from_stats("t", day_at(2024, 1, 1), {FileRef{"date=2024-01-01/part-000001.dcol", 2}}, s);
  m.watermark = Watermark{"t", ts_at(2024, 1, 1, 2), 90min};
  m.created_at = ts_at(2024, 1, 2);
  auto j = to_json(m);
  CHECK(manifest_from_json(j) == m);
  CHECK(manifest_from_json(nlohmann::json::parse(j.dump())) == m);

  auto bad = j;
  bad["partitions"]["2024-01-01"]["row_count"] = 3;
  CHECK_THROWS_AS(manifest_from_json(bad), ParseError);
  bad = j;
  bad["partitions"]["2024-01-01"]["max_ts"] = "2024-01-02T00:00:00.000000Z";
  CHECK_THROWS_AS(manifest_from_json(bad), ParseError);
}

TEST_CASE("crash at any commit stage leaves the previous version intact") {
  TempDir dir;
  Table table(dir.path(), "t");
  std::mt19937_64 rng(13);
  auto base = test::random_records(rng, 400, ts_at(2024, 1, 1), ts_at(2024, 1, 4), 20);
  commit_rows(table, base);
  ScanRequest all{.range = {ts_at(2024, 1, 1), ts_at(2024, 2, 1)}};
  auto before = scan_records(table, *table.current(), all).first;

  for (auto stage : {CommitStage::data_written, CommitStage::manifest_staged, CommitStage::manifest_published,
                     CommitStage::current_staged}) {
    CAPTURE(static_cast<int>(stage));
    {
      auto w = table.open_writer();
      auto extra = test::random_records(rng, 50, ts_at(2024, 1, 2), ts_at(2024, 1, 3), 20);
      auto p = w.write_partition(day_at(2024, 1, 2), extra);
      w.set_fault_hook([stage](CommitStage s) {
        if (s == stage) throw std::runtime_error("crash");
      });
      CHECK_THROWS_AS(w.commit(1, {p}, mark()), std::runtime_error);
    }
    CHECK(table.current_version() == 1);
    auto w = table.open_writer();  // runs recovery
    CHECK(table.committed_versions() == std::vector<std::uint64_t>{1});
    for (const auto& e : std::filesystem::recursive_directory_iterator(table.dir()))
      CHECK(e.path().extension() != ".tmp");
    CHECK(scan_records(table, *table.current(), all).first == before);
  }
}

TEST_CASE("partition pruning") {
  TempDir dir;
  Table table(dir.path(), "t");
  std::vector<EventRecord> rows;
  for (int d = 0; d < 365; ++d) {
    auto day = day_at(2024, 1, 1) + std::chrono::days{d};
    rows.push_back({static_cast<ElementId>(1 + d % 5), day_start(day) + 12h, d == 100 ? 0.9 : 0.3, {}});
  }
  auto m = commit_rows(table, rows);
  REQUIRE(m.partitions.size() == 365);

  CHECK(prune_partitions(m, {ts_at(2024, 1, 10), ts_at(2024, 1, 13)}).size() == 3);
  auto gt = ValuePredicate::greater_than(0.45);
  auto hit = prune_partitions(m, {ts_at(2024, 1, 1), ts_at(2025, 1, 1)}, &gt);
  REQUIRE(hit.size() == 1);
  CHECK(hit[0].day == day_at(2024, 1, 1) + std::chrono::days{100});
  ElementSet two{2};
  CHECK(prune_partitions(m, {ts_at(2024, 1, 1), ts_at(2025, 1, 1)}, nullptr, &two).size() == 73);

  // random ranges: opened == overlapping days (closed-stat overlap with a half-open range)
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::int64_t> t(to_micros(ts_at(2023, 12, 1)), to_micros(ts_at(2025, 1, 31)));
  for (int i = 0; i < 200; ++i) {
    auto a = from_micros(t(rng)), b = from_micros(t(rng));
    if (a == b) continue;
    TimeRange r{std::min(a, b), std::max(a, b)};
    std::size_t expect = 0;
    for (const auto& rec : rows) expect += r.contains(rec.ts);
    auto [got, stats] = scan_records(table, m, {.range = r});
    CHECK(stats.partitions_opened == expect);
    CHECK(got.size() == expect);
  }
}

TEST_CASE("pruned scan equals full-scan oracle") {
  TempDir dir;
  Table table(dir.path(), "t");
  std::mt19937_64 rng(19);
  auto rows = test::random_records(rng, 20000, ts_at(2024, 3, 1), ts_at(2024, 3, 21), 60);
  // clustered values so statistics can refute predicates
  for (auto& r : rows) r.value = r.value * 0.2 + (r.element_id % 4) * 0.25;
  commit_rows(table, rows, {.row_group_rows = 256, .compression_level = 1});
  // a second file on some days exercises multi-file partitions
  auto more = test::random_records(rng, 3000, ts_at(2024, 3, 5), ts_at(2024, 3, 9), 60);
  {
    auto m = table.current();
    auto w = table.open_writer({.row_group_rows = 256, .compression_level = 1});
    std::map<Day, std::vector<EventRecord>> by_day;
    for (const auto& r : more) by_day[day_of(r.ts)].push_back(r);
    std::vector<PartitionMeta> changes;
    for (auto& [d, rs] : by_day) {
      auto existing = m->partitions.at(d);
      std::vector<EventRecord> fresh;
      for (auto& r : test::map_dedup(rs)) {
        bool clash = std::any_of(rows.begin(), rows.end(), [&](const auto& o) { return same_key(o, r); });
        if (!clash) fresh.push_back(r);
      }
      auto p = w.write_partition(d, fresh);
      changes.push_back(existing.with_file(p.files[0], p.stats()));
    }
    w.commit(m->version, changes, mark());
    rows.insert(rows.end(), more.begin(), more.end());
  }
  auto stored = test::map_dedup(rows);
  auto m = table.current();
  CHECK(m->total_rows() == stored.size());

  std::uniform_int_distribution<std::int64_t> t(to_micros(ts_at(2024, 2, 28)), to_micros(ts_at(2024, 3, 23)));
  std::uniform_real_distribution<double> v(-0.1, 1.1);
  std::size_t mismatches = 0;
  for (int i = 0; i < 300; ++i) {
    auto a = from_micros(t(rng)), b = from_micros(t(rng));
    if (a == b) continue;
    ScanRequest req{.range = {std::min(a, b), std::max(a, b)}};
    switch (i % 4) {
      case 0: req.value = ValuePredicate::greater_than(v(rng)); break;
      case 1: req.value = ValuePredicate::at_most(v(rng)); break;
      case 2: {
        double x = v(rng);
        req.value = ValuePredicate::between(x, x + 0.2);
        break;
      }
      default: break;
    }
    if (i % 3 == 0) req.elements = make_element_set({ElementId(i % 60 + 1), ElementId((i * 7) % 60 + 1), 999});
    req.parallelism = i % 2 ? 3 : 1;
    auto [got, stats] = scan_records(table, *m, req);
    auto expect = full_scan_oracle(stored, req.range, req.value, req.elements);
    if (test::sorted_by_key(got) != expect) ++mismatches;
    CHECK(stats.partitions_opened <= stats.partitions_total);
    CHECK(stats.rows_returned <= stats.rows_scanned);
    CHECK(stats.rows_returned == got.size());
  }
  CHECK(mismatches == 0);
}

TEST_CASE("scan projection and errors") {
  TempDir dir;
  Table table(dir.path(), "t");
  std::vector<EventRecord> rows{{1, ts_at(2024, 1, 1, 1), 0.5, std::int16_t{3}}, {2, ts_at(2024, 1, 1, 2), 0.6, {}}};
  auto m = commit_rows(table, rows);
  ScanRequest req{.range = {ts_at(2024, 1, 1), ts_at(2024, 1, 2)}};
  req.projection = {Field::element_id, Field::ts};
  std::size_t n = 0;
  scan(table, m, req, [&](const RecordBatch& b) {
    CHECK(b.value.empty());
    n += b.size();
  });
  CHECK(n == 2);
  req.projection = {};
  CHECK_THROWS_AS(scan(table, m, req, [](const RecordBatch&) {}), ValidationError);
  req.projection = Projection::all();
  req.range = {ts_at(2024, 1, 2), ts_at(2024, 1, 1)};
  CHECK_THROWS_AS(scan(table, m, req, [](const RecordBatch&) {}), ValidationError);

  req.range = {ts_at(2024, 1, 1), ts_at(2024, 1, 2)};
  std::filesystem::remove(table.file_path(m.partitions.begin()->second.files[0]));
  CHECK_THROWS_AS(scan(table, m, req, [](const RecordBatch&) {}), ScanError);
}
