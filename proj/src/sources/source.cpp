#include "dcs/sources/source.hpp"

#include <algorithm>
#include <tuple>

#include "dcs/common/error.hpp"
#include "dcs/sources/fixture_source.hpp"
#include "dcs/sources/sql_source.hpp"

namespace dcs::sources {

namespace {
constexpr std::size_t kChunkRows = 1 << 16;

bool time_less(const SourceRow& a, const SourceRow& b) { return std::tie(a.ts, a.element_id) < std::tie(b.ts, b.element_id); }
}  // namespace

void sort_by_time(std::vector<SourceRow>& rows) {
  if (!std::is_sorted(rows.begin(), rows.end(), time_less)) std::stable_sort(rows.begin(), rows.end(), time_less);
}

std::vector<SourceRow> Source::collect_after(std::optional<Timestamp> cursor) {
  std::vector<SourceRow> out;
  read_after(cursor, [&](std::span<const SourceRow> chunk) { out.insert(out.end(), chunk.begin(), chunk.end()); });
  return out;
}

void MemorySource::set_rows(std::vector<SourceRow> rows) {
  rows_ = std::move(rows);
  sort_by_time(rows_);
}

void MemorySource::append(std::span<const SourceRow> rows) {
  rows_.insert(rows_.end(), rows.begin(), rows.end());
  sort_by_time(rows_);
}

void MemorySource::read_after(std::optional<Timestamp> cursor, const RowSink& sink) {
  if (unreachable_) throw SourceError("memory source marked unreachable");
  auto it = rows_.begin();
  if (cursor) {
    it = std::upper_bound(rows_.begin(), rows_.end(), *cursor,
                          [](Timestamp c, const SourceRow& r) { return c < r.ts; });
  }
  while (it != rows_.end()) {
    auto end = rows_.end() - it > static_cast<std::ptrdiff_t>(kChunkRows) ? it + kChunkRows : rows_.end();
    sink(std::span<const SourceRow>(&*it, static_cast<std::size_t>(end - it)));
    it = end;
  }
}

std::unique_ptr<Source> open_source(const std::string& descriptor, const std::string& sql_table,
                                    const std::string& ts_column) {
  const std::string fixture_prefix = "fixture:";
  if (descriptor.rfind(fixture_prefix, 0) == 0)
    return std::make_unique<FixtureSource>(descriptor.substr(fixture_prefix.size()));
  return SqlSource::open(descriptor, sql_table, ts_column);
}

}  // namespace dcs::sources
