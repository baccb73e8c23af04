#include "dcs/ingest/sync.hpp"

#include <algorithm>
#include <map>

#include "dcs/common/error.hpp"

namespace dcs::ingest {

namespace {

using storage::PartitionMeta;
using storage::TableWriter;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<EventRecord> read_partition_rows(const storage::Table& table, const PartitionMeta& p) {
  std::vector<EventRecord> rows;
  rows.reserve(p.row_count);
  for (const auto& f : p.files) {
    auto part = storage::ColumnFileReader(table.file_path(f)).read_all();
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return sort_dedup_last_wins(std::move(rows));
}

/// Applies incoming rows of one day on top of the working state of that day.
class DayMerger {
 public:
  DayMerger(TableWriter& writer, const storage::Manifest& base) : writer_(writer), base_(base) {}

  void apply(Day day, std::vector<EventRecord> incoming) {
    incoming = sort_dedup_last_wins(std::move(incoming));
    if (incoming.empty()) return;
    const PartitionMeta* existing = working(day);
    if (!existing) {
      changes_[day] = writer_.write_partition(day, incoming);
      rows_written_ += incoming.size();
      return;
    }
    std::vector<EventRecord> current = read_partition_rows(writer_.table(), *existing);
    std::vector<EventRecord> fresh;
    std::size_t updated = 0;
    auto it = current.begin();
    for (const auto& r : incoming) {
      it = std::lower_bound(it, current.end(), r, key_less);
      if (it != current.end() && same_key(*it, r)) {
        if (!(*it == r)) {
          *it = r;  // newer batch wins
          ++updated;
        }
      } else {
        fresh.push_back(r);
      }
    }
    if (updated == 0 && fresh.empty()) return;
    rows_written_ += updated + fresh.size();
    if (updated == 0) {
      PartitionMeta added = writer_.write_partition(day, fresh);
      changes_[day] = existing->with_file(added.files.front(), added.stats());
      return;
    }
    current.insert(current.end(), fresh.begin(), fresh.end());
    changes_[day] = writer_.write_partition(day, current);
  }

  std::uint64_t rows_written() const { return rows_written_; }
  std::vector<PartitionMeta> take_changes() {
    std::vector<PartitionMeta> out;
    for (auto& [day, p] : changes_) out.push_back(std::move(p));
    changes_.clear();
    return out;
  }
  std::vector<Day> touched() const {
    std::vector<Day> days;
    for (const auto& [day, p] : changes_) days.push_back(day);
    return days;
  }

 private:
  const PartitionMeta* working(Day day) const {
    if (auto it = changes_.find(day); it != changes_.end()) return &it->second;
    if (auto it = base_.partitions.find(day); it != base_.partitions.end()) return &it->second;
    return nullptr;
  }

  TableWriter& writer_;
  const storage::Manifest& base_;
  std::map<Day, PartitionMeta> changes_;
  std::uint64_t rows_written_ = 0;
};

/// Buffers rows per day and hands complete days to `flush`. Rows arrive in
/// ts order, so a day is flushed once a later day shows up.
template <typename Flush>
class DayBuffer {
 public:
  explicit DayBuffer(Flush flush) : flush_(std::move(flush)) {}

  void add(std::span<const EventRecord> rows) {
    for (const auto& r : rows) {
      Day d = day_of(r.ts);
      if (current_ && d != *current_) flush_current();
      current_ = d;
      rows_.push_back(r);
    }
  }
  void finish() {
    if (current_) flush_current();
  }

 private:
  void flush_current() {
    flush_(*current_, std::move(rows_));
    rows_.clear();
    current_.reset();
  }

  Flush flush_;
  std::optional<Day> current_;
  std::vector<EventRecord> rows_;
};

SyncReport sync_incremental_once(sources::Source& source, const storage::Table& table, const SyncOptions& options) {
  auto start = std::chrono::steady_clock::now();
  TableWriter writer = table.open_writer(options.write);
  auto base = table.current();

  SyncReport report;
  report.table = table.name();
  report.mode = SyncMode::incremental;
  report.old_watermark = base->watermark.last_ts;
  report.manifest_version = base->version;

  storage::Watermark wm = base->watermark;
  wm.overlap = options.overlap;

  DayMerger merger(writer, *base);
  std::optional<Timestamp> max_seen;
  auto flush = [&](Day day, std::vector<EventRecord> rows) { merger.apply(day, std::move(rows)); };
  DayBuffer<decltype(flush)> buffer(flush);
  source.read_after(wm.read_cursor(), [&](std::span<const sources::SourceRow> chunk) {
    report.rows_read += chunk.size();
    for (const auto& r : chunk) max_seen = max_seen ? std::max(*max_seen, r.ts) : r.ts;
    buffer.add(chunk);
  });
  buffer.finish();

  if (max_seen && (!wm.last_ts || *max_seen > *wm.last_ts)) wm.last_ts = max_seen;
  report.new_watermark = wm.last_ts;
  report.rows_written = merger.rows_written();
  report.partitions_touched = merger.touched();

  bool changed = !report.partitions_touched.empty() || wm != base->watermark;
  if (changed) {
    storage::Manifest m = writer.commit(base->version, merger.take_changes(), wm, storage::CommitMode::merge);
    report.manifest_version = m.version;
  }
  report.duration_seconds = seconds_since(start);
  return report;
}

SyncReport sync_full_overwrite_once(sources::Source& source, const storage::Table& table, const SyncOptions& options) {
  auto start = std::chrono::steady_clock::now();
  TableWriter writer = table.open_writer(options.write);
  auto base = table.current();

  SyncReport report;
  report.table = table.name();
  report.mode = SyncMode::full_overwrite;
  report.old_watermark = base->watermark.last_ts;

  // Start from an empty table so nothing of the previous version carries over.
  storage::Manifest empty;
  empty.table = table.name();
  DayMerger merger(writer, empty);
  std::optional<Timestamp> max_seen;
  auto flush = [&](Day day, std::vector<EventRecord> rows) { merger.apply(day, std::move(rows)); };
  DayBuffer<decltype(flush)> buffer(flush);
  source.read_after(std::nullopt, [&](std::span<const sources::SourceRow> chunk) {
    report.rows_read += chunk.size();
    for (const auto& r : chunk) max_seen = max_seen ? std::max(*max_seen, r.ts) : r.ts;
    buffer.add(chunk);
  });
  buffer.finish();
  report.rows_written = merger.rows_written();
  report.partitions_touched = merger.touched();

  storage::Watermark wm = base->watermark;
  wm.overlap = options.overlap;
  // The watermark only records progress; it never moves backwards even if
  // the source shrank.
  if (max_seen && (!wm.last_ts || *max_seen > *wm.last_ts)) wm.last_ts = max_seen;
  report.new_watermark = wm.last_ts;

  storage::Manifest m = writer.commit(base->version, merger.take_changes(), wm, storage::CommitMode::replace_all);
  report.manifest_version = m.version;
  report.duration_seconds = seconds_since(start);
  return report;
}

template <typename Fn>
SyncReport with_retry(Fn&& fn) {
  try {
    return fn();
  } catch (const CommitConflictError&) {
    return fn();
  }
}

}  // namespace

std::string_view to_string(SyncMode mode) {
  return mode == SyncMode::incremental ? "incremental" : "full_overwrite";
}

SyncMode parse_sync_mode(std::string_view text) {
  if (text == "incremental") return SyncMode::incremental;
  if (text == "full_overwrite" || text == "overwrite") return SyncMode::full_overwrite;
  throw ValidationError("unknown sync mode '" + std::string(text) + "'");
}

SyncReport sync_incremental(sources::Source& source, const storage::Table& table, const SyncOptions& options) {
  return with_retry([&] { return sync_incremental_once(source, table, options); });
}

SyncReport sync_full_overwrite(sources::Source& source, const storage::Table& table, const SyncOptions& options) {
  return with_retry([&] { return sync_full_overwrite_once(source, table, options); });
}

SyncReport sync(SyncMode mode, sources::Source& source, const storage::Table& table, const SyncOptions& options) {
  return mode == SyncMode::incremental ? sync_incremental(source, table, options)
                                       : sync_full_overwrite(source, table, options);
}

nlohmann::json to_json(const SyncReport& r) {
  nlohmann::json days = nlohmann::json::array();
  for (Day d : r.partitions_touched) days.push_back(format_date(d));
  auto ts = [](const std::optional<Timestamp>& t) { return t ? nlohmann::json(format_iso(*t)) : nlohmann::json(nullptr); };
  return {{"table", r.table},
          {"mode", to_string(r.mode)},
          {"rows_read", r.rows_read},
          {"rows_written", r.rows_written},
          {"partitions_touched", days},
          {"old_watermark", ts(r.old_watermark)},
          {"new_watermark", ts(r.new_watermark)},
          {"duration", r.duration_seconds},
          {"manifest_version", r.manifest_version},
          {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)}};
}

}  // namespace dcs::ingest
