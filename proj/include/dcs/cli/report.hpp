#pragma once

// Tabular report rendered as CSV or JSON from the same data.
//
// CSV: parameter lines `# key=value`, then a header row, then one line per
// row; fields separated by ',', quoted per RFC 4180 when needed, numbers
// in shortest round-trip form, timestamps as 2024-01-01T00:00:00.000000Z.
// JSON: {"parameters": {...}, "rows": [{column: value, ...}, ...]}.

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcs/analyses/geometry.hpp"
#include "dcs/analyses/hv_nominal.hpp"
#include "dcs/analyses/link_flags.hpp"
#include "dcs/query/binning.hpp"
#include "dcs/storage/scan.hpp"

namespace dcs::cli {

enum class Format { csv, json };

Format parse_format(std::string_view text);

struct Report {
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::ordered_json>> rows;

  void write(std::ostream& out, Format format) const;
};

std::string csv_field(const nlohmann::ordered_json& value);

/// Raw rows: element_id, ts, value, status.
void add_record_rows(Report& r, std::span<const EventRecord> records);

/// Binned rows: element_id, bin_start, then the chosen aggregates.
void set_bin_columns(Report& r, const std::vector<std::string>& aggs);
void add_bin_rows(Report& r, const query::BinnedMap& binned, const std::vector<std::string>& aggs);
std::vector<std::string> parse_aggs(std::string_view text);

Report flag_report(analyses::FlagRule rule, std::span<const analyses::LinkFlag> flags);
Report counts_report(const analyses::DailyCounts& counts);
Report grid_report(const analyses::GeometryGrid& grid);

std::string format_stats(const storage::ScanStats& s);

}  // namespace dcs::cli
