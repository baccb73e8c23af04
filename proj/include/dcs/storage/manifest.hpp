#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcs/common/time.hpp"
#include "dcs/storage/column_file.hpp"
#include "dcs/storage/element_digest.hpp"

namespace dcs::storage {

/// A data file belonging to a partition; `path` is relative to the table directory.
struct FileRef {
  std::string path;
  std::uint64_t rows = 0;

  friend bool operator==(const FileRef&, const FileRef&) = default;
};

/// Metadata for one UTC day of a table. Statistics are exact over all files.
struct PartitionMeta {
  std::string table;
  Day day{};
  std::vector<FileRef> files;
  std::uint64_t row_count = 0;
  Timestamp min_ts{};
  Timestamp max_ts{};
  double min_value = 0.0;
  double max_value = 0.0;
  ElementDigest element_ids;

  DataStats stats() const;
  static PartitionMeta from_stats(std::string table, Day day, std::vector<FileRef> files, const DataStats& stats);
  /// Adds a file holding keys disjoint from the existing ones.
  PartitionMeta with_file(FileRef file, const DataStats& file_stats) const;

  friend bool operator==(const PartitionMeta&, const PartitionMeta&) = default;
};

/// Incremental-sync cursor for one table.
struct Watermark {
  std::string table;
  std::optional<Timestamp> last_ts;
  Duration overlap = std::chrono::hours{1};

  /// Lower bound (exclusive) for the next incremental read; nullopt means "read everything".
  std::optional<Timestamp> read_cursor() const {
    if (!last_ts) return std::nullopt;
    return *last_ts - overlap;
  }

  friend bool operator==(const Watermark&, const Watermark&) = default;
};

/// Immutable snapshot of a table. Version 0 is the implicit empty table.
struct Manifest {
  std::uint64_t version = 0;
  std::string table;
  std::map<Day, PartitionMeta> partitions;
  Watermark watermark;
  Timestamp created_at{};

  std::uint64_t total_rows() const;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

nlohmann::json to_json(const PartitionMeta& p);
nlohmann::json to_json(const Watermark& w);
nlohmann::json to_json(const Manifest& m);

/// Throws ParseError on schema violations.
PartitionMeta partition_from_json(const nlohmann::json& j);
Watermark watermark_from_json(const nlohmann::json& j);
Manifest manifest_from_json(const nlohmann::json& j);

}  // namespace dcs::storage
