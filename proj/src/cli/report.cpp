#include "dcs/cli/report.hpp"

#include <algorithm>
#include <ostream>

#include "dcs/common/error.hpp"
#include "dcs/sources/fixture_source.hpp"

namespace dcs::cli {

using json = nlohmann::ordered_json;

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::csv;
  if (text == "json") return Format::json;
  throw ValidationError("unknown format '" + std::string(text) + "'");
}

std::string csv_field(const json& v) {
  switch (v.type()) {
    case json::value_t::null: return "";
    case json::value_t::boolean: return v.get<bool>() ? "true" : "false";
    case json::value_t::number_integer: return std::to_string(v.get<std::int64_t>());
    case json::value_t::number_unsigned: return std::to_string(v.get<std::uint64_t>());
    case json::value_t::number_float: return sources::format_double(v.get<double>());
    case json::value_t::string: {
      const auto& s = v.get_ref<const std::string&>();
      if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char c : s) {
        if (c == '"') q += '"';
        q += c;
      }
      return q + '"';
    }
    default: return csv_field(json(v.dump()));
  }
}

void Report::write(std::ostream& out, Format format) const {
  if (format == Format::json) {
    json doc;
    doc["parameters"] = parameters;
    auto arr = json::array();
    for (const auto& row : rows) {
      json o = json::object();
      for (std::size_t i = 0; i < columns.size(); ++i) o[columns[i]] = row[i];
      arr.push_back(std::move(o));
    }
    doc["rows"] = std::move(arr);
    out << doc.dump(2) << '\n';
    return;
  }
  for (const auto& [k, v] : parameters.items()) out << "# " << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << '\n';
  }
}

void add_record_rows(Report& r, std::span<const EventRecord> records) {
  r.columns = {"element_id", "ts", "value", "status"};
  for (const auto& rec : records)
    r.rows.push_back({rec.element_id, format_iso(rec.ts), rec.value, rec.status ? json(*rec.status) : json(nullptr)});
}

std::vector<std::string> parse_aggs(std::string_view text) {
  static const std::vector<std::string> kAll = {"count", "min", "max", "mean", "std", "last"};
  if (text.empty() || text == "all") return kAll;
  std::vector<std::string> out;
  while (!text.empty()) {
    auto comma = text.find(',');
    std::string item(text.substr(0, comma));
    text.remove_prefix(comma == std::string_view::npos ? text.size() : comma + 1);
    if (std::find(kAll.begin(), kAll.end(), item) == kAll.end()) throw ValidationError("unknown aggregate '" + item + "'");
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
  }
  if (out.empty()) throw ValidationError("no aggregate given");
  return out;
}

void set_bin_columns(Report& r, const std::vector<std::string>& aggs) {
  r.columns = {"element_id", "bin_start"};
  r.columns.insert(r.columns.end(), aggs.begin(), aggs.end());
}

void add_bin_rows(Report& r, const query::BinnedMap& binned, const std::vector<std::string>& aggs) {
  for (const auto& [id, series] : binned) {
    for (const auto& b : series.bins) {
      std::vector<json> row{id, format_iso(b.bin_start)};
      for (const auto& a : aggs) {
        if (a == "count") row.emplace_back(b.count);
        else if (a == "min") row.emplace_back(b.min);
        else if (a == "max") row.emplace_back(b.max);
        else if (a == "mean") row.emplace_back(b.mean);
        else if (a == "std") row.emplace_back(b.std);
        else row.emplace_back(b.last);
      }
      r.rows.push_back(std::move(row));
    }
  }
}

Report flag_report(analyses::FlagRule rule, std::span<const analyses::LinkFlag> flags) {
  Report r;
  switch (rule) {
    case analyses::FlagRule::high_rssi:
      r.columns = {"element_id", "rule", "window_start", "window_end", "occurrences", "peak_value", "hard_failure"};
      for (const auto& f : flags)
        r.rows.push_back({f.element_id, std::string(to_string(f.rule)), format_iso(f.window.start),
                          format_iso(f.window.end), f.evidence.occurrence_count, f.evidence.peak_value,
                          f.evidence.reached_hard_failure});
      break;
    case analyses::FlagRule::oscillating:
      r.columns = {"element_id", "rule", "window_start", "window_end", "unstable_bins", "max_std"};
      for (const auto& f : flags)
        r.rows.push_back({f.element_id, std::string(to_string(f.rule)), format_iso(f.window.start),
                          format_iso(f.window.end), f.evidence.unstable_bins, f.evidence.max_std});
      break;
    case analyses::FlagRule::stale:
      // One row per silent interval.
      r.columns = {"element_id", "rule", "interval_start", "interval_end", "duration_s"};
      for (const auto& f : flags)
        for (const auto& iv : f.evidence.stale_intervals)
          r.rows.push_back({f.element_id, std::string(to_string(f.rule)), format_iso(iv.start), format_iso(iv.end),
                            std::chrono::duration<double>(iv.length()).count()});
      break;
  }
  return r;
}

Report counts_report(const analyses::DailyCounts& counts) {
  Report r;
  r.columns = {"day", "above", "below"};
  for (const auto& [day, c] : counts) r.rows.push_back({format_date(day), c.above, c.below});
  return r;
}

Report grid_report(const analyses::GeometryGrid& grid) {
  Report r;
  r.columns = {"layer"};
  for (int s = 1; s <= analyses::kSectorsPerWheel; ++s) r.columns.push_back("sector_" + std::to_string(s));
  for (int l = 1; l <= analyses::kLayers; ++l) {
    std::vector<json> row{l};
    for (int s = 1; s <= analyses::kSectorsPerWheel; ++s) row.emplace_back(grid.at(l, s));
    r.rows.push_back(std::move(row));
  }
  return r;
}

std::string format_stats(const storage::ScanStats& s) {
  return "scan: partitions_total=" + std::to_string(s.partitions_total) +
         " partitions_opened=" + std::to_string(s.partitions_opened) + " rows_scanned=" + std::to_string(s.rows_scanned) +
         " rows_returned=" + std::to_string(s.rows_returned);
}

}  // namespace dcs::cli
