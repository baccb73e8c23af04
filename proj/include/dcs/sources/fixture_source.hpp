#pragma once

// Fixture file format: one record per line, tab separated
//
//   element_id <TAB> iso8601_ts <TAB> value <TAB> status
//
// `status` may be empty or omitted. Blank lines and lines starting with '#'
// are ignored. Timestamps are UTC, e.g. 2024-05-01T12:00:00.000000Z.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "dcs/sources/source.hpp"

namespace dcs::sources {

class FixtureSource : public Source {
 public:
  explicit FixtureSource(std::filesystem::path path) : path_(std::move(path)) {}

  std::string describe() const override { return "fixture:" + path_.string(); }
  /// Re-reads the file on every call so a growing fixture behaves like a live table.
  void read_after(std::optional<Timestamp> cursor, const RowSink& sink) override;

 private:
  std::filesystem::path path_;
};

/// Parses one fixture line; `line_no` is used for error messages.
SourceRow parse_fixture_line(std::string_view line, std::size_t line_no);
std::string format_fixture_line(const SourceRow& row);

/// Parses a whole fixture document. Throws ParseError naming the line.
std::vector<SourceRow> parse_fixture(std::string_view text);

void write_fixture(const std::filesystem::path& path, std::span<const SourceRow> rows);
void write_fixture(std::ostream& out, std::span<const SourceRow> rows);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace dcs::sources
