// Acceptance suite: prints one [PASS]/[FAIL] line per criterion and exits
// non-zero if any criterion fails. DCS_ACCEPT_KEEP=1 keeps the work dir.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "dcs/analyses/geometry.hpp"
#include "dcs/cli/app.hpp"
#include "dcs/cli/pipeline.hpp"
#include "dcs/common/error.hpp"
#include "dcs/ingest/sync.hpp"
#include "dcs/simgen/generator.hpp"
#include "dcs/sources/source.hpp"
#include "dcs/storage/scan.hpp"
#include "dcs/storage/table.hpp"
#include "support/test_support.hpp"

using namespace dcs;
using namespace std::chrono_literals;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "AC" << id << " " << name << ": " << o.detail << std::endl;
  if (!o.pass) ++g_failures;
}

template <class F>
void criterion(int id, const std::string& name, F&& body) {
  try {
    report(id, name, body());
  } catch (const std::exception& e) {
    report(id, name, {false, std::string("exception: ") + e.what()});
  }
}

std::string fmt(double v, int prec = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(prec);
  s << v;
  return s.str();
}

/// Streams generator output as an upstream archive without materialising it.
class GeneratorSource : public sources::Source {
 public:
  explicit GeneratorSource(simgen::GenConfig cfg) : cfg_(std::move(cfg)) {}
  std::string describe() const override { return "generator"; }
  void read_after(std::optional<Timestamp> cursor, const sources::RowSink& sink) override {
    std::vector<EventRecord> kept;
    simgen::generate_events(cfg_, [&](Day day, std::span<const EventRecord> rows) {
      if (!cursor) return sink(rows);
      if (day_end(day) <= *cursor) return;
      kept.clear();
      for (const auto& r : rows)
        if (r.ts > *cursor) kept.push_back(r);
      sink(kept);
    });
  }

 private:
  simgen::GenConfig cfg_;
};

std::uint64_t stored_rows(const storage::Table& table) {
  auto m = table.current();
  storage::ScanRequest req;
  req.range = {from_micros(std::numeric_limits<std::int64_t>::min() / 2), from_micros(std::numeric_limits<std::int64_t>::max() / 2)};
  req.projection = {storage::Field::element_id, storage::Field::ts};
  return storage::scan(table, *m, req, [](const storage::RecordBatch&) {}).rows_returned;
}

std::set<ElementId> flagged(const std::vector<analyses::LinkFlag>& flags) {
  std::set<ElementId> s;
  for (const auto& f : flags) s.insert(f.element_id);
  return s;
}

std::set<ElementId> truth_for(const std::vector<simgen::TruthEntry>& truth, const std::string& flag) {
  std::set<ElementId> s;
  for (const auto& t : truth)
    if (t.expected_flag == flag) s.insert(t.element);
  return s;
}

struct PR {
  double precision = 1.0;
  double recall = 1.0;
};

PR precision_recall(const std::set<ElementId>& got, const std::set<ElementId>& want) {
  std::size_t tp = 0;
  for (auto id : got) tp += want.count(id);
  PR pr;
  if (!got.empty()) pr.precision = static_cast<double>(tp) / static_cast<double>(got.size());
  if (!want.empty()) pr.recall = static_cast<double>(tp) / static_cast<double>(want.size());
  return pr;
}

std::map<Day, std::uint64_t> day_counts(const storage::Table& table) {
  auto m = table.current();
  std::map<Day, std::uint64_t> out;
  for (const auto& [d, p] : m->partitions) out[d] = p.row_count;
  return out;
}

std::string query_bytes(const std::filesystem::path& store, TimeRange range) {
  std::ostringstream out, err;
  int code = cli::run({"dcsctl", "--store", store.string(), "query", "--from", format_iso(range.lo), "--to",
                       format_iso(range.hi)},
                      out, err);
  if (code != 0) throw std::runtime_error("query failed: " + err.str());
  return out.str();
}

// Full-scale dataset shared by criteria 1, 2, 3, 6 and 8.
struct BigStore {
  simgen::GenConfig cfg;
  std::filesystem::path root;
  std::filesystem::path mapping_file;
  std::filesystem::path runs_file;
  std::filesystem::path mask_file;
  std::uint64_t distinct_keys = 0;
  std::map<Day, std::set<ElementId>> hv_reporting;
  ingest::SyncReport first_sync;
  double build_seconds = 0;
};

BigStore build_big(const std::filesystem::path& dir) {
  BigStore b;
  b.cfg.seed = 2024;
  b.cfg.shutdown = simgen::tail_shutdown(b.cfg, 14);
  b.cfg.random_stuck_high = 8;
  b.cfg.random_oscillating = 4;
  b.cfg.random_disabled = 4;
  b.cfg.random_hv_off = 2;
  simgen::expand_random_faults(b.cfg);
  b.root = dir / "big";
  std::filesystem::create_directories(b.root);
  b.mapping_file = b.root / "mapping.tsv";
  b.runs_file = b.root / "runs.tsv";
  b.mask_file = b.root / "mask.tsv";
  simgen::generate_mapping(b.cfg).save(b.mapping_file);
  sources::write_run_intervals(b.runs_file, simgen::generate_runs(b.cfg));
  simgen::shutdown_mask(b.cfg).save(b.mask_file);

  // Independent tallies straight from the generator stream.
  simgen::generate_events(b.cfg, [&](Day day, std::span<const EventRecord> rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == 0 || !same_key(rows[i - 1], rows[i])) ++b.distinct_keys;
      if (b.cfg.is_hv(rows[i].element_id)) b.hv_reporting[day].insert(rows[i].element_id);
    }
  });

  auto t0 = Clock::now();
  GeneratorSource src(b.cfg);
  storage::Table table(b.root / "store", "eventhistory");
  b.first_sync = ingest::sync_incremental(src, table);
  b.build_seconds = since(t0);
  return b;
}

cli::AnalysisScope full_scope(const simgen::GenConfig& cfg) {
  cli::AnalysisScope s;
  s.range = cfg.span();
  s.parallelism = std::max(1u, std::thread::hardware_concurrency());
  return s;
}

}  // namespace

int main() {
  test::TempDir work("dcs-acceptance");
  std::cout << "work dir: " << work.path() << ", cores: " << std::thread::hardware_concurrency()
            << ", kernels: " << kernels::active().name << std::endl;

  auto t_build = Clock::now();
  BigStore big = build_big(work.path());
  storage::Table big_table(big.root / "store", "eventhistory");
  auto big_manifest = big_table.current();
  auto mapping = simgen::generate_mapping(big.cfg);
  auto truth = simgen::ground_truth(big.cfg);
  std::uint64_t big_rows = 0;
  for (const auto& [d, p] : big_manifest->partitions) big_rows += p.row_count;
  std::cout << "dataset: " << big_rows << " rows, " << big_manifest->partitions.size() << " partitions, sync "
            << fmt(big.first_sync.duration_seconds, 1) << " s, setup " << fmt(since(t_build), 1) << " s" << std::endl;

  criterion(1, "failed-links scan+bin latency", [&]() -> Outcome {
    auto run = cli::failed_links(big_table, *big_manifest, full_scope(big.cfg), mapping);
    // Without the value pushdown every partition is decoded.
    cli::HighRssiOptions full;
    full.pushdown = false;
    auto slow = cli::failed_links(big_table, *big_manifest, full_scope(big.cfg), mapping, full);
    auto got = flagged(run.flags);
    auto want = truth_for(truth, "high_rssi");
    bool scale = big_manifest->partitions.size() == 365 && big_rows >= 10'000'000 &&
                 mapping.elements_of_kind(analyses::ElementKind::rssi).size() == 512;
    bool ok = scale && run.scan_seconds < 30.0 && slow.scan_seconds < 30.0 && got == want && flagged(slow.flags) == want;
    return {ok, "scan+bin " + fmt(run.scan_seconds) + " s, without pushdown " + fmt(slow.scan_seconds) +
                    " s (limit 30 s) over " + std::to_string(big_rows) +
                    " rows / " + std::to_string(big_manifest->partitions.size()) + " partitions, " +
                    std::to_string(run.stats.partitions_opened) + " opened, " + std::to_string(got.size()) +
                    " links flagged (truth " + std::to_string(want.size()) + "), " +
                    std::to_string(std::thread::hardware_concurrency()) + " core(s)"};
  });

  criterion(2, "full analyze pipeline latency", [&]() -> Outcome {
    const std::string store = (big.root / "store").string();
    const std::string from = format_iso(big.cfg.span().lo), to = format_iso(big.cfg.span().hi);
    const std::string map = big.mapping_file.string();
    std::vector<std::vector<std::string>> commands{
        {"failed-links", "--mapping", map},
        {"oscillating", "--mapping", map},
        {"stale", "--mapping", map, "--drop-mask", big.mask_file.string()},
        {"heatmap", "--mapping", map, "--wheel", "1"},
        {"heatmap", "--mapping", map, "--wheel", "2"},
        {"hv-nominal", "--mapping", map, "--runs", big.runs_file.string()},
    };
    auto t0 = Clock::now();
    std::string timings;
    for (auto& c : commands) {
      std::vector<std::string> args{"dcsctl", "--store", store, "analyze"};
      args.insert(args.end(), c.begin(), c.end());
      args.insert(args.end(), {"--from", from, "--to", to, "--threads",
                               std::to_string(std::max(1u, std::thread::hardware_concurrency()))});
      std::ostringstream out, err;
      auto t = Clock::now();
      int code = cli::run(args, out, err);
      if (code != 0) return {false, c[0] + " exited " + std::to_string(code) + ": " + err.str()};
      timings += " " + c[0] + "=" + fmt(since(t), 1) + "s";
    }
    double total = since(t0);
    return {total < 180.0, "total " + fmt(total, 1) + " s (limit 180 s);" + timings};
  });

  criterion(3, "partition pruning", [&]() -> Outcome {
    storage::ScanRequest week;
    week.range = {day_start(test::day_at(2024, 3, 4)), day_start(test::day_at(2024, 3, 11))};
    auto s = storage::scan(big_table, *big_manifest, week, [](const storage::RecordBatch&) {});
    bool ok = s.partitions_opened == 7 && s.partitions_total == 365;
    std::string detail = "7-day query opened " + std::to_string(s.partitions_opened) + "/" +
                         std::to_string(s.partitions_total);

    // Random ranges with sub-day edges. Edges stay inside 00:30..23:30 so
    // every day's data (which spans the whole day) overlaps the range.
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> day(0, 364);
    std::uniform_int_distribution<std::int64_t> offset(30 * 60, 23 * 3600 + 30 * 60);
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
      int a = day(rng), b = day(rng);
      if (a > b) std::swap(a, b);
      Timestamp lo = day_start(big.cfg.start + std::chrono::days{a}) + std::chrono::seconds{offset(rng)};
      Timestamp hi = day_start(big.cfg.start + std::chrono::days{b}) + std::chrono::seconds{offset(rng)};
      if (!(lo < hi)) hi = lo + 1h;
      std::uint64_t expected = 0;
      for (int d = 0; d < 366; ++d) {
        Day dd = big.cfg.start + std::chrono::days{d};
        if (day_start(dd) < hi && day_end(dd) > lo && d < 365) ++expected;
      }
      storage::ScanRequest req;
      req.range = {lo, hi};
      req.elements = ElementSet{2001};  // reports every day; keeps decoding cheap
      auto st = storage::scan(big_table, *big_manifest, req, [](const storage::RecordBatch&) {});
      if (st.partitions_opened != expected) ++mismatches;
    }
    ok = ok && mismatches == 0;
    return {ok, detail + "; 200 random ranges, " + std::to_string(mismatches) + " mismatches"};
  });

  criterion(4, "pruned scan equals full-scan oracle", [&]() -> Outcome {
    simgen::GenConfig cfg;
    cfg.seed = 44;
    cfg.days = 120;
    cfg.rssi_elements = 32;
    cfg.hv_channels = 8;
    cfg.shutdown = simgen::tail_shutdown(cfg, 10);
    cfg.random_stuck_high = 4;
    cfg.random_oscillating = 2;
    cfg.random_disabled = 2;
    cfg.random_hv_off = 1;
    simgen::expand_random_faults(cfg);
    auto rows = simgen::generate(cfg).events;
    // Two syncs split inside a day, small row groups: multi-file partitions
    // and group-level statistics both get exercised.
    storage::Table table(work / "ac4", "eventhistory");
    ingest::SyncOptions opts;
    opts.write.row_group_rows = 512;
    Timestamp cut = cfg.span().lo + 57 * kOneDay + 13h;
    sources::MemorySource src;
    std::vector<EventRecord> head;
    for (const auto& r : rows)
      if (r.ts < cut) head.push_back(r);
    src.set_rows(head);
    ingest::sync_incremental(src, table, opts);
    src.set_rows(rows);
    ingest::sync_incremental(src, table, opts);
    auto m = table.current();
    std::size_t multi = 0;
    for (const auto& [d, p] : m->partitions) multi += p.files.size() > 1;

    auto oracle_rows = test::sorted_by_key(rows);
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::int64_t> t(to_micros(cfg.span().lo) - to_micros(Timestamp{kOneDay}),
                                                  to_micros(cfg.span().hi) + to_micros(Timestamp{kOneDay}));
    std::uniform_real_distribution<double> v(-0.1, 0.6);
    int mismatches = 0;
    std::uint64_t opened = 0, total = 0;
    for (int i = 0; i < 1000; ++i) {
      std::int64_t a = t(rng), b = t(rng);
      if (a == b) ++b;
      if (a > b) std::swap(a, b);
      // Mostly short ranges, some long ones.
      if (i % 4 != 0) b = std::min(b, a + std::uniform_int_distribution<std::int64_t>(1, 10 * 86'400'000'000LL)(rng));
      storage::ScanRequest req;
      req.range = {from_micros(a), from_micros(b)};
      switch (i % 5) {
        case 0: break;
        case 1: req.value = storage::ValuePredicate::greater_than(v(rng)); break;
        case 2: req.value = storage::ValuePredicate::less_than(v(rng)); break;
        case 3: {
          double x = v(rng), y = v(rng);
          req.value = storage::ValuePredicate::between(std::min(x, y), std::max(x, y));
          break;
        }
        default: req.value = storage::ValuePredicate::at_least(500.0); break;
      }
      if (i % 3 == 0) {
        std::vector<ElementId> ids;
        for (int k = std::uniform_int_distribution<int>(1, 6)(rng); k > 0; --k)
          ids.push_back(std::uniform_int_distribution<ElementId>(1, 40)(rng) + (k == 1 ? 2000 : 0));
        req.elements = make_element_set(ids);
      }
      std::vector<EventRecord> want;
      for (const auto& r : oracle_rows) {
        if (!req.range.contains(r.ts)) continue;
        if (req.value && !req.value->matches(r.value)) continue;
        if (req.elements && !std::binary_search(req.elements->begin(), req.elements->end(), r.element_id)) continue;
        want.push_back(r);
      }
      auto [got, st] = storage::scan_records(table, *m, req);
      opened += st.partitions_opened;
      total += st.partitions_total;
      if (test::sorted_by_key(got) != want) ++mismatches;
    }
    return {mismatches == 0, "1000 cases, " + std::to_string(mismatches) + " mismatches; " +
                                 std::to_string(multi) + " multi-file partitions; mean opened " +
                                 fmt(static_cast<double>(opened) / 1000.0, 1) + "/" +
                                 fmt(static_cast<double>(total) / 1000.0, 0)};
  });

  criterion(5, "incremental sync equals single import", [&]() -> Outcome {
    simgen::GenConfig cfg;
    cfg.seed = 55;
    cfg.days = 30;
    cfg.rssi_elements = 16;
    cfg.hv_channels = 4;
    cfg.shutdown = simgen::tail_shutdown(cfg, 3);
    cfg.random_disabled = 2;
    simgen::expand_random_faults(cfg);
    auto rows = simgen::generate(cfg).events;

    auto ref_root = work / "ac5" / "ref";
    storage::Table ref(ref_root, "eventhistory");
    sources::MemorySource all(rows);
    ingest::sync_incremental(all, ref);
    auto ref_days = day_counts(ref);
    auto ref_bytes = query_bytes(ref_root, cfg.span());

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::int64_t> t(to_micros(cfg.span().lo), to_micros(cfg.span().hi));
    int failures = 0;
    std::size_t max_ways = 0;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::int64_t> cuts{t(rng)};  // the trial's split point
      for (int k = std::uniform_int_distribution<int>(0, 3)(rng); k > 0; --k) cuts.push_back(t(rng));
      std::sort(cuts.begin(), cuts.end());
      max_ways = std::max(max_ways, cuts.size() + 1);
      auto root = work / "ac5" / ("t" + std::to_string(trial));
      storage::Table table(root, "eventhistory");
      sources::MemorySource src;
      for (auto c : cuts) {
        std::vector<EventRecord> prefix;
        for (const auto& r : rows)
          if (to_micros(r.ts) < c) prefix.push_back(r);
        src.set_rows(std::move(prefix));
        ingest::sync_incremental(src, table);
      }
      src.set_rows(rows);
      ingest::sync_incremental(src, table);
      bool same = day_counts(table) == ref_days && query_bytes(root, cfg.span()) == ref_bytes;
      if (!same) ++failures;
      std::filesystem::remove_all(root);
    }
    return {failures == 0, "50 split trials (up to " + std::to_string(max_ways) + "-way), " +
                               std::to_string(failures) + " differ; reference " + std::to_string(rows.size()) +
                               " rows, query output " + std::to_string(ref_bytes.size()) + " bytes"};
  });

  // Criteria 6 and 7 share the per-seed datasets.
  int idem_failures = 0, idem_datasets = 0;
  std::string idem_detail;
  auto check_idempotent = [&](sources::Source& src, const storage::Table& table, std::uint64_t distinct) {
    auto before = table.current_version();
    auto again = ingest::sync_incremental(src, table);
    std::uint64_t stored = stored_rows(table);
    ++idem_datasets;
    bool ok = again.rows_written == 0 && table.current_version() == before && stored == distinct;
    if (!ok) {
      ++idem_failures;
      idem_detail += " [dataset " + std::to_string(idem_datasets) + ": rewrote " + std::to_string(again.rows_written) +
                     ", stored " + std::to_string(stored) + " vs " + std::to_string(distinct) + "]";
    }
  };

  {
    GeneratorSource src(big.cfg);
    check_idempotent(src, big_table, big.distinct_keys);
  }

  Outcome ac7;
  try {
    ac7 = [&]() -> Outcome {
      const int seeds = 20;
      int exact = 0;
      std::size_t n_high = 0, n_osc = 0, n_stale = 0;
      double worst_edge_h = 0.0;
      std::string bad;
      for (int s = 1; s <= seeds; ++s) {
        simgen::GenConfig cfg;
        cfg.seed = 1000 + static_cast<std::uint64_t>(s);
        cfg.days = 90;
        cfg.rssi_elements = 64;
        cfg.hv_channels = 8;
        cfg.shutdown = simgen::tail_shutdown(cfg, 14);
        cfg.random_stuck_high = 4;
        cfg.random_oscillating = 3;
        cfg.random_disabled = 3;
        cfg.random_hv_off = 1;
        simgen::expand_random_faults(cfg);
        auto ds = simgen::generate(cfg);
        auto root = work / "ac7" / std::to_string(s);
        storage::Table table(root, "eventhistory");
        sources::MemorySource src(ds.events);
        ingest::sync_incremental(src, table);
        check_idempotent(src, table, test::map_dedup(ds.events).size());

        auto m = table.current();
        cli::AnalysisScope scope;
        scope.range = cfg.span();
        auto high = flagged(cli::failed_links(table, *m, scope, ds.mapping).flags);
        auto osc = flagged(cli::oscillating_links(table, *m, scope, ds.mapping).flags);
        cli::AnalysisScope stale_scope = scope;
        stale_scope.drop_mask = &ds.shutdown_mask;
        auto stale_run = cli::stale_links(table, *m, stale_scope, &ds.mapping);
        auto stale = flagged(stale_run.flags);

        auto want_high = truth_for(ds.truth, "high_rssi");
        auto want_osc = truth_for(ds.truth, "oscillating");
        auto want_stale = truth_for(ds.truth, "stale");
        n_high += want_high.size();
        n_osc += want_osc.size();
        n_stale += want_stale.size();

        // Each injected disabled window must match one reported stale
        // interval to within one day at both ends.
        bool edges = true;
        for (const auto& t : ds.truth) {
          if (t.expected_flag != "stale") continue;
          bool matched = false;
          for (const auto& f : stale_run.flags) {
            if (f.element_id != t.element) continue;
            for (const auto& iv : f.evidence.stale_intervals) {
              auto d0 = iv.start > t.window.lo ? iv.start - t.window.lo : t.window.lo - iv.start;
              auto d1 = iv.end > t.window.hi ? iv.end - t.window.hi : t.window.hi - iv.end;
              if (d0 <= kOneDay && d1 <= kOneDay) {
                matched = true;
                worst_edge_h = std::max(worst_edge_h, std::chrono::duration<double, std::ratio<3600>>(std::max(d0, d1)).count());
              }
            }
          }
          edges = edges && matched;
        }
        bool ok = high == want_high && osc == want_osc && stale == want_stale && edges;
        if (ok) {
          ++exact;
        } else {
          auto a = precision_recall(high, want_high), b = precision_recall(osc, want_osc), c = precision_recall(stale, want_stale);
          bad += " [seed " + std::to_string(cfg.seed) + ": high P=" + fmt(a.precision) + " R=" + fmt(a.recall) +
                 ", osc P=" + fmt(b.precision) + " R=" + fmt(b.recall) + ", stale P=" + fmt(c.precision) +
                 " R=" + fmt(c.recall) + (edges ? "" : ", stale edges off") + "]";
        }
        std::filesystem::remove_all(root);
      }
      return {exact == seeds, std::to_string(exact) + "/" + std::to_string(seeds) +
                                  " seeds exact (precision = recall = 1.0) over " + std::to_string(n_high) +
                                  " stuck, " + std::to_string(n_osc) + " oscillating, " + std::to_string(n_stale) +
                                  " disabled links; worst stale edge offset " + fmt(worst_edge_h) + " h" + bad};
    }();
  } catch (const std::exception& e) {
    ac7 = {false, std::string("exception: ") + e.what()};
  }

  report(6, "idempotent re-sync", {idem_failures == 0 && idem_datasets >= 21,
                                   std::to_string(idem_datasets) + " datasets re-synced, " +
                                       std::to_string(idem_failures) + " wrote rows or miscounted" + idem_detail});
  report(7, "analysis oracle exactness", ac7);

  criterion(8, "hv channel conservation", [&]() -> Outcome {
    auto runs = query::IntervalSet::from_runs(simgen::generate_runs(big.cfg));
    auto res = cli::hv_nominal(big_table, *big_manifest, full_scope(big.cfg), &mapping, 505.0, runs);
    int bad = 0, off_days = 0, off_ok = 0, run_days = 0;
    std::set<Day> hv_off_days;
    for (const auto& f : big.cfg.faults)
      if (f.kind == simgen::FaultKind::hv_off_interval) hv_off_days.insert(day_of(f.window.lo));
    for (int d = 0; d < big.cfg.days; ++d) {
      Day day = big.cfg.start + std::chrono::days{d};
      bool has_run = runs.intersects(day_start(day), day_end(day));
      auto it = res.counts.find(day);
      if (!has_run) {
        if (it != res.counts.end()) ++bad;
        continue;
      }
      ++run_days;
      if (it == res.counts.end()) {
        ++bad;
        continue;
      }
      auto reporting = big.hv_reporting[day].size();
      if (it->second.above + it->second.below != reporting || reporting != 64) ++bad;
      if (hv_off_days.count(day)) {
        ++off_days;
        if (it->second.above == 0) ++off_ok;
      }
    }
    bool ok = bad == 0 && off_days == off_ok && res.counts.size() == static_cast<std::size_t>(run_days);
    return {ok, std::to_string(res.counts.size()) + " counted days, above + below = 64 on all but " +
                    std::to_string(bad) + "; " + std::to_string(big.cfg.days - run_days) +
                    " days without runs produce no row; " + std::to_string(off_ok) + "/" + std::to_string(off_days) +
                    " hv-off days show 0 above"};
  });

  criterion(9, "crash safety", [&]() -> Outcome {
    storage::Table table(work / "ac9", "eventhistory");
    std::mt19937_64 rng(9);
    {
      auto rows = test::map_dedup(test::random_records(rng, 5000, test::ts_at(2024, 1, 1), test::ts_at(2024, 1, 11), 20));
      sources::MemorySource src(rows);
      ingest::sync_incremental(src, table);
    }
    const storage::CommitStage stages[] = {storage::CommitStage::data_written, storage::CommitStage::manifest_staged,
                                           storage::CommitStage::manifest_published,
                                           storage::CommitStage::current_staged};
    int bad = 0, advanced = 0;
    for (int i = 0; i < 100; ++i) {
      auto version = table.current_version();
      storage::ScanRequest req;
      req.range = {test::ts_at(2023, 1, 1), test::ts_at(2025, 1, 1)};
      auto before = storage::scan_records(table, *table.current(), req).first;
      auto stage = stages[i % 4];
      auto extra = test::map_dedup(test::random_records(rng, 300, test::ts_at(2024, 1, 5), test::ts_at(2024, 1, 15), 25));

      std::cout.flush();
      pid_t pid = fork();
      if (pid == 0) {
        // Child: commit and die at the chosen stage without any cleanup.
        try {
          auto w = table.open_writer();
          w.set_fault_hook([&](storage::CommitStage s) {
            if (s == stage) _exit(0);
          });
          std::map<Day, std::vector<EventRecord>> by_day;
          for (const auto& r : extra) by_day[day_of(r.ts)].push_back(r);
          std::vector<storage::PartitionMeta> changes;
          for (auto& [d, rs] : by_day) changes.push_back(w.write_partition(d, rs));
          w.commit(version, std::move(changes), table.current()->watermark);
        } catch (...) {
          _exit(3);
        }
        _exit(4);  // hook never fired
      }
      int status = 0;
      waitpid(pid, &status, 0);
      bool died_at_stage = WIFEXITED(status) && WEXITSTATUS(status) == 0;

      { auto w = table.open_writer(); }  // recovery runs on open
      auto after = storage::scan_records(table, *table.current(), req).first;
      bool leftovers = false;
      for (const auto& e : std::filesystem::recursive_directory_iterator(table.dir()))
        leftovers = leftovers || e.path().extension() == ".tmp";
      auto versions = table.committed_versions();
      bool ok = died_at_stage && table.current_version() == version && after == before && !leftovers &&
                (versions.empty() || versions.back() == version);
      if (!ok) ++bad;

      // Every tenth round a clean sync moves the table forward.
      if (i % 10 == 9) {
        sources::MemorySource src(extra);
        if (ingest::sync_incremental(src, table).manifest_version == version + 1) ++advanced;
      }
    }
    return {bad == 0 && advanced == 10, "100 killed commits (all four stages), " + std::to_string(bad) +
                                            " left a changed store; " + std::to_string(advanced) +
                                            "/10 clean commits afterwards"};
  });

  if (std::getenv("DCS_ACCEPT_KEEP")) {
    std::cout << "keeping " << work.path() << std::endl;
    std::cout.flush();
    _exit(g_failures == 0 ? 0 : 1);
  }
  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed") << std::endl;
  return g_failures == 0 ? 0 : 1;
}
