#include "dcs/cli/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <string>

#include "dcs/common/error.hpp"
#include "dcs/query/binning.hpp"
#include "dcs/query/extremes.hpp"
#include "dcs/query/last_update.hpp"
#include "dcs/query/semijoin.hpp"

namespace dcs::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ElementSet scope_elements(const AnalysisScope& scope, const analyses::ElementMapping& mapping,
                          analyses::ElementKind kind) {
  return scope.elements ? *scope.elements : mapping.elements_of_kind(kind);
}

query::BinnedMap bin_scan(const storage::Table& table, const storage::Manifest& manifest, storage::ScanRequest req,
                          Duration bin, FlagRun& run, const query::IntervalSet* drop_mask) {
  auto t0 = Clock::now();
  auto [binned, stats] = query::time_bin(table, manifest, std::move(req), bin);
  run.stats = stats;
  run.scan_seconds = seconds_since(t0);
  if (drop_mask) binned = query::interval_semijoin(binned, *drop_mask, query::JoinMode::drop);
  return std::move(binned);
}

}  // namespace

FlagRun failed_links(const storage::Table& table, const storage::Manifest& manifest, const AnalysisScope& scope,
                     const analyses::ElementMapping& mapping, const HighRssiOptions& options) {
  if (!scope.range.valid()) throw ValidationError("invalid time range");
  storage::ScanRequest req;
  req.range = scope.range;
  req.elements = scope_elements(scope, mapping, analyses::ElementKind::rssi);
  req.parallelism = scope.parallelism;
  if (options.pushdown) req.value = storage::ValuePredicate::greater_than(options.params.threshold);
  FlagRun run;
  if (options.count_samples) {
    req.projection = storage::Projection{storage::Field::element_id, storage::Field::ts, storage::Field::value};
    auto t0 = Clock::now();
    auto [rows, stats] = storage::scan_records(table, manifest, req);
    run.stats = stats;
    run.scan_seconds = seconds_since(t0);
    if (scope.drop_mask) rows = query::interval_semijoin(rows, *scope.drop_mask, query::JoinMode::drop);
    run.flags = analyses::flag_high_rssi_samples(rows, mapping, options.params);
    return run;
  }
  auto binned = bin_scan(table, manifest, std::move(req), options.bin, run, scope.drop_mask);
  run.flags = analyses::flag_high_rssi(binned, mapping, options.params);
  return run;
}

FlagRun oscillating_links(const storage::Table& table, const storage::Manifest& manifest, const AnalysisScope& scope,
                          const analyses::ElementMapping& mapping, const OscillationOptions& options) {
  if (!scope.range.valid()) throw ValidationError("invalid time range");
  storage::ScanRequest req;
  req.range = scope.range;
  req.elements = scope_elements(scope, mapping, analyses::ElementKind::rssi);
  req.parallelism = scope.parallelism;
  FlagRun run;
  auto binned = bin_scan(table, manifest, std::move(req), options.bin, run, scope.drop_mask);
  run.flags = analyses::flag_oscillating(binned, mapping, options.params);
  return run;
}

FlagRun stale_links(const storage::Table& table, const storage::Manifest& manifest, const AnalysisScope& scope,
                    const analyses::ElementMapping* mapping, Duration staleness) {
  if (!scope.range.valid()) throw ValidationError("invalid time range");
  std::optional<ElementSet> elements = scope.elements;
  if (!elements && mapping) elements = mapping->elements_of_kind(analyses::ElementKind::rssi);
  FlagRun run;
  auto t0 = Clock::now();
  storage::ScanStats s1, s2;
  auto last = query::last_update_index(table, manifest, scope.range, elements, &s1);
  auto gaps = query::gap_index(table, manifest, scope.range, elements, staleness, &s2);
  run.stats = s2;
  run.stats.partitions_opened += s1.partitions_opened;
  run.stats.rows_scanned += s1.rows_scanned;
  run.stats.rows_returned += s1.rows_returned;
  run.scan_seconds = seconds_since(t0);
  static const query::IntervalSet kNoMask;
  run.flags = analyses::detect_stale(last, gaps, scope.range, staleness, scope.drop_mask ? *scope.drop_mask : kNoMask);
  return run;
}

HvRun hv_nominal(const storage::Table& table, const storage::Manifest& manifest, const AnalysisScope& scope,
                 const analyses::ElementMapping* mapping, double nominal, const query::IntervalSet& runs) {
  if (!scope.range.valid()) throw ValidationError("invalid time range");
  storage::ScanRequest req;
  req.range = scope.range;
  req.elements = scope.elements;
  if (!req.elements && mapping) req.elements = mapping->elements_of_kind(analyses::ElementKind::hv_voltage);
  if (!req.elements) throw ValidationError("hv-nominal needs a mapping or an element list");
  req.projection = storage::Projection{storage::Field::element_id, storage::Field::ts, storage::Field::value};
  req.parallelism = scope.parallelism;
  query::DailyExtremeAccumulator acc(query::ExtremeKind::max);
  HvRun out;
  out.stats = storage::scan(table, manifest, req, [&](const storage::RecordBatch& b) { acc.add(b); });
  out.counts = analyses::hv_nominal_counts(acc.result(), nominal, runs, mapping);
  return out;
}

ElementSet parse_element_list(std::string_view text) {
  std::vector<ElementId> ids;
  auto num = [&](std::string_view s) {
    ElementId v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
      throw ValidationError("bad element id '" + std::string(s) + "'");
    return v;
  };
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = text.substr(0, comma);
    text.remove_prefix(comma == std::string_view::npos ? text.size() : comma + 1);
    if (item.empty()) continue;
    auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      ids.push_back(num(item));
      continue;
    }
    auto lo = num(item.substr(0, dash));
    auto hi = num(item.substr(dash + 1));
    if (lo > hi) throw ValidationError("bad element range '" + std::string(item) + "'");
    if (hi - lo > 10'000'000) throw ValidationError("element range too large");
    for (auto i = lo;; ++i) {
      ids.push_back(i);
      if (i == hi) break;
    }
  }
  return make_element_set(std::move(ids));
}

}  // namespace dcs::cli
