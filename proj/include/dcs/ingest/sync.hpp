#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcs/sources/source.hpp"
#include "dcs/storage/table.hpp"

namespace dcs::ingest {

enum class SyncMode { incremental, full_overwrite };

std::string_view to_string(SyncMode mode);
SyncMode parse_sync_mode(std::string_view text);

struct SyncOptions {
  /// Re-read window below the watermark for late arrivals.
  Duration overlap = std::chrono::hours{1};
  storage::WriteOptions write;
};

struct SyncReport {
  std::string table;
  SyncMode mode = SyncMode::incremental;
  std::uint64_t rows_read = 0;
  std::uint64_t rows_written = 0;  ///< rows inserted or changed, after dedup
  std::vector<Day> partitions_touched;
  std::optional<Timestamp> old_watermark;
  std::optional<Timestamp> new_watermark;
  double duration_seconds = 0.0;
  std::uint64_t manifest_version = 0;  ///< version after the sync (unchanged if nothing was committed)
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

nlohmann::json to_json(const SyncReport& r);

/// Reads rows newer than (watermark - overlap), merges them into day
/// partitions with dedup on (element_id, ts) and commits one manifest
/// version. A replay that changes nothing commits nothing. Throws
/// SourceError (nothing committed) or CommitConflictError (after one retry).
SyncReport sync_incremental(sources::Source& source, const storage::Table& table, const SyncOptions& options = {});

/// Rewrites the table from the full source contents; the new version
/// references only the newly written partitions.
SyncReport sync_full_overwrite(sources::Source& source, const storage::Table& table, const SyncOptions& options = {});

SyncReport sync(SyncMode mode, sources::Source& source, const storage::Table& table, const SyncOptions& options = {});

}  // namespace dcs::ingest
