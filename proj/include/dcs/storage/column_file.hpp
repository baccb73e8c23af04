#pragma once

// Partition data file: a small columnar container.
//
//   "DCOL" u32:format-version
//   row group 0: element_id chunk, ts chunk, value chunk, status chunk
//   row group 1: ...
//   footer: u32:group-count, per group {u32 rows, u32 min/max element,
//           i64 min/max ts, f64 min/max value, 4 x {u64 offset, u32 stored,
//           u32 raw, u32 crc32}}
//   u32:footer-length u32:footer-crc32 "DCOL"
//
// Chunks are zlib-compressed. element_id is run-length encoded as
// (id, count) pairs, ts as a raw first value followed by zigzag varint
// deltas, value as raw little-endian doubles, status as a presence bitmap
// followed by the present int16 values. Rows are sorted by (element_id, ts).

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dcs/common/record.hpp"
#include "dcs/storage/element_digest.hpp"
#include "dcs/storage/record_batch.hpp"

namespace dcs::storage {

struct WriteOptions {
  std::size_t row_group_rows = 16384;
  int compression_level = 1;
};

/// Exact statistics over the rows of one file (or partition).
struct DataStats {
  std::uint64_t rows = 0;
  Timestamp min_ts{};
  Timestamp max_ts{};
  double min_value = 0.0;
  double max_value = 0.0;
  ElementDigest elements;

  static DataStats of(std::span<const EventRecord> rows);
  DataStats merged(const DataStats& other) const;
};

/// Writes `rows` (sorted by key, unique) atomically to `path`.
DataStats write_column_file(const std::filesystem::path& path, std::span<const EventRecord> rows,
                            const WriteOptions& options = {});

struct RowGroupInfo {
  struct Chunk {
    std::uint64_t offset = 0;
    std::uint32_t stored = 0;
    std::uint32_t raw = 0;
    std::uint32_t crc = 0;
  };
  std::uint32_t rows = 0;
  ElementId min_element = 0;
  ElementId max_element = 0;
  std::int64_t min_ts = 0;
  std::int64_t max_ts = 0;
  double min_value = 0.0;
  double max_value = 0.0;
  std::array<Chunk, 4> chunks{};
};

/// Loads a data file and decodes row groups on demand. Integrity problems
/// surface as ScanError carrying the file name.
class ColumnFileReader {
 public:
  explicit ColumnFileReader(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }
  const std::vector<RowGroupInfo>& row_groups() const { return groups_; }
  std::uint64_t row_count() const;

  /// Decodes every row of group `g`; columns outside `projection` stay empty
  /// unless `need_values` forces the value column.
  RecordBatch read_group(std::size_t g, Projection projection, bool need_values = false) const;

  std::vector<EventRecord> read_all() const;

 private:
  std::vector<std::uint8_t> inflate_chunk(const RowGroupInfo::Chunk& c) const;

  std::filesystem::path path_;
  std::vector<std::uint8_t> bytes_;
  std::vector<RowGroupInfo> groups_;
};

}  // namespace dcs::storage
