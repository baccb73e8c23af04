#pragma once

// Sync configuration, an INI-style key-value file. Comments are whole
// lines starting with ';' or '#'. Relative paths resolve against the
// directory of the config file; table sections run in file order.
//
//   [store]
//   root = store
//   cadence = 24h
//
//   [table:eventhistory]
//   mode = incremental
//   source = fixture:data/events.tsv
//   overlap = 1h
//
//   [table:conditions]
//   mode = full_overwrite
//   source = sqlite:/data/archive.db
//   source_table = EVENTHISTORY
//   ts_column = ts
//
// Credentials for SQL endpoints come from DCS_SOURCE_USER and
// DCS_SOURCE_PASSWORD only.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dcs/ingest/sync.hpp"

namespace dcs::ingest {

struct TableJob {
  std::string table;
  SyncMode mode = SyncMode::incremental;
  std::string source;
  std::string source_table = "EVENTHISTORY";
  std::string ts_column = "ts";
  Duration overlap = std::chrono::hours{1};
};

struct ScheduleConfig {
  std::filesystem::path store_root;
  Duration cadence = std::chrono::hours{24};
  std::vector<TableJob> tables;

  /// Throws ValidationError / ParseError on malformed content.
  static ScheduleConfig load(const std::filesystem::path& file);
  static ScheduleConfig parse(std::istream& in, const std::filesystem::path& base_dir);
};

using SourceFactory = std::function<std::unique_ptr<sources::Source>(const TableJob&)>;

/// Builds sources from descriptors via sources::open_source.
SourceFactory default_source_factory();

/// Runs every table (or just `only_table`) once, in config order. Failures
/// are recorded in the table's report and do not stop the other tables.
std::vector<SyncReport> run_cycle(const ScheduleConfig& config, const SourceFactory& factory,
                                  const std::optional<std::string>& only_table = std::nullopt);

using ReportSink = std::function<void(const SyncReport&)>;
using Sleeper = std::function<void(Duration)>;

/// Repeats run_cycle `cycles` times (0 = forever), sleeping `cadence` in between.
void run_schedule(const ScheduleConfig& config, const SourceFactory& factory, std::size_t cycles,
                  const ReportSink& on_report, const Sleeper& sleep = {},
                  const std::optional<std::string>& only_table = std::nullopt);

}  // namespace dcs::ingest
