#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcs/common/record.hpp"

namespace dcs::sources {

/// A row as delivered by an upstream archive; same meaning as EventRecord.
using SourceRow = EventRecord;
using RowSink = std::function<void(std::span<const SourceRow>)>;

/// Read-only client for an upstream archive table.
class Source {
 public:
  virtual ~Source() = default;

  virtual std::string describe() const = 0;

  /// Delivers every row with ts > cursor (all rows when cursor is empty) in
  /// ascending (ts, element_id) order, in one or more chunks. Throws
  /// SourceError when the upstream cannot be reached.
  virtual void read_after(std::optional<Timestamp> cursor, const RowSink& sink) = 0;

  std::vector<SourceRow> collect_after(std::optional<Timestamp> cursor);
};

/// In-memory source, used by tests and by the generator pipeline.
class MemorySource : public Source {
 public:
  MemorySource() = default;
  explicit MemorySource(std::vector<SourceRow> rows) { set_rows(std::move(rows)); }

  std::string describe() const override { return "memory"; }
  void read_after(std::optional<Timestamp> cursor, const RowSink& sink) override;

  void set_rows(std::vector<SourceRow> rows);
  void append(std::span<const SourceRow> rows);
  const std::vector<SourceRow>& rows() const { return rows_; }
  /// While set, read_after throws SourceError.
  void set_unreachable(bool unreachable) { unreachable_ = unreachable; }

 private:
  std::vector<SourceRow> rows_;  // kept in (ts, element_id) order
  bool unreachable_ = false;
};

/// Orders rows by (ts, element_id), stable for equal keys.
void sort_by_time(std::vector<SourceRow>& rows);

/// Opens a source from a descriptor: `fixture:<path>`, or an SQL endpoint
/// (see EndpointDescriptor) together with the archive table and ts column.
std::unique_ptr<Source> open_source(const std::string& descriptor, const std::string& sql_table = "EVENTHISTORY",
                                    const std::string& ts_column = "ts");

}  // namespace dcs::sources
