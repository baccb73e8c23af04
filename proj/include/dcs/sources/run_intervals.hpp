#pragma once

// Run-interval file format, tab separated, one run per line:
//
//   run_number <TAB> start_iso <TAB> end_iso <TAB> kind
//
// kind is one of physics, special, other. '#' starts a comment line.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcs/common/time.hpp"
#include "dcs/sources/sql_source.hpp"

namespace dcs::sources {

enum class RunKind { physics, special, other };

std::string_view to_string(RunKind kind);
RunKind parse_run_kind(std::string_view text);

/// A data-taking period, half-open [start_ts, end_ts).
struct RunInterval {
  std::int64_t run_number = 0;
  Timestamp start_ts{};
  Timestamp end_ts{};
  RunKind kind = RunKind::physics;

  friend bool operator==(const RunInterval&, const RunInterval&) = default;
};

/// Validates (ValidationError when start >= end), merges overlapping runs
/// of the same kind (the merged run keeps the earliest run number) and
/// returns the result sorted by start_ts.
std::vector<RunInterval> normalize_runs(std::vector<RunInterval> runs);

std::vector<RunInterval> fetch_run_intervals(const std::filesystem::path& file);
/// Reads `run_number, start_ts, end_ts, kind` columns from an SQL table.
std::vector<RunInterval> fetch_run_intervals(SqlConnection& connection, const std::string& table);

std::vector<RunInterval> parse_run_intervals(std::string_view text);
void write_run_intervals(const std::filesystem::path& file, std::span<const RunInterval> runs);

}  // namespace dcs::sources
