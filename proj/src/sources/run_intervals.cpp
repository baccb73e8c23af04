#include "dcs/sources/run_intervals.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <tuple>

#include "dcs/common/error.hpp"
#include "dcs/common/file_util.hpp"

namespace dcs::sources {

std::string_view to_string(RunKind kind) {
  switch (kind) {
    case RunKind::physics: return "physics";
    case RunKind::special: return "special";
    case RunKind::other: return "other";
  }
  return "other";
}

RunKind parse_run_kind(std::string_view text) {
  if (text == "physics") return RunKind::physics;
  if (text == "special") return RunKind::special;
  if (text == "other") return RunKind::other;
  throw ParseError("unknown run kind '" + std::string(text) + "'");
}

std::vector<RunInterval> normalize_runs(std::vector<RunInterval> runs) {
  for (const auto& r : runs) {
    if (!(r.start_ts < r.end_ts))
      throw ValidationError("run " + std::to_string(r.run_number) + " has start >= end (" + format_iso(r.start_ts) +
                            " .. " + format_iso(r.end_ts) + ")");
  }
  std::sort(runs.begin(), runs.end(), [](const RunInterval& a, const RunInterval& b) {
    return std::tie(a.start_ts, a.end_ts, a.run_number) < std::tie(b.start_ts, b.end_ts, b.run_number);
  });
  std::vector<RunInterval> out;
  std::map<RunKind, std::size_t> open;  // kind -> index in out of its latest run
  for (const auto& r : runs) {
    auto it = open.find(r.kind);
    if (it != open.end() && r.start_ts < out[it->second].end_ts) {
      auto& last = out[it->second];
      last.end_ts = std::max(last.end_ts, r.end_ts);
      last.run_number = std::min(last.run_number, r.run_number);
      continue;
    }
    open[r.kind] = out.size();
    out.push_back(r);
  }
  return out;
}

std::vector<RunInterval> parse_run_intervals(std::string_view text) {
  std::vector<RunInterval> runs;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> f;
    while (true) {
      auto tab = line.find('\t');
      f.push_back(line.substr(0, tab));
      if (tab == std::string_view::npos) break;
      line.remove_prefix(tab + 1);
    }
    if (f.size() != 4) throw ParseError("expected run_number, start, end, kind", line_no);
    RunInterval r;
    auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), r.run_number);
    if (ec != std::errc{} || ptr != f[0].data() + f[0].size()) throw ParseError("bad run number", line_no);
    try {
      r.start_ts = parse_iso(f[1]);
      r.end_ts = parse_iso(f[2]);
      r.kind = parse_run_kind(f[3]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    runs.push_back(r);
  }
  return runs;
}

std::vector<RunInterval> fetch_run_intervals(const std::filesystem::path& file) {
  return normalize_runs(parse_run_intervals(read_file_text(file)));
}

std::vector<RunInterval> fetch_run_intervals(SqlConnection& connection, const std::string& table) {
  validate_identifier(table);
  std::vector<RunInterval> runs;
  connection.query("SELECT run_number, start_ts, end_ts, kind FROM " + table + " ORDER BY start_ts", {},
                   [&](const SqlRow& row) {
                     if (row.size() != 4) throw SourceError("unexpected column count from run table");
                     RunInterval r;
                     auto num = std::get_if<std::int64_t>(&row[0]);
                     auto kind = std::get_if<std::string>(&row[3]);
                     if (!num || !kind) throw SourceError("run table needs integer run_number and text kind");
                     r.run_number = *num;
                     r.start_ts = sql_timestamp(row[1]);
                     r.end_ts = sql_timestamp(row[2]);
                     r.kind = parse_run_kind(*kind);
                     runs.push_back(r);
                   });
  return normalize_runs(std::move(runs));
}

void write_run_intervals(const std::filesystem::path& file, std::span<const RunInterval> runs) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  for (const auto& r : runs) {
    out << r.run_number << '\t' << format_iso(r.start_ts) << '\t' << format_iso(r.end_ts) << '\t' << to_string(r.kind)
        << '\n';
  }
}

}  // namespace dcs::sources
