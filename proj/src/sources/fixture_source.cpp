#include "dcs/sources/fixture_source.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "dcs/common/error.hpp"
#include "dcs/common/file_util.hpp"

namespace dcs::sources {

namespace {

template <typename T>
T parse_number(std::string_view field, const char* what, std::size_t line_no) {
  T v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty())
    throw ParseError(std::string("bad ") + what + " '" + std::string(field) + "'", line_no);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

SourceRow parse_fixture_line(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::string_view fields[4];
  std::size_t n = 0;
  while (true) {
    auto tab = line.find('\t');
    if (n == 4) throw ParseError("too many fields", line_no);
    fields[n++] = line.substr(0, tab);
    if (tab == std::string_view::npos) break;
    line.remove_prefix(tab + 1);
  }
  if (n < 3) throw ParseError("expected element_id, ts, value[, status]", line_no);
  SourceRow r;
  r.element_id = parse_number<ElementId>(fields[0], "element_id", line_no);
  try {
    r.ts = parse_iso(fields[1]);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line_no);
  }
  r.value = parse_number<double>(fields[2], "value", line_no);
  if (!std::isfinite(r.value)) throw ParseError("value must be finite", line_no);
  if (n == 4 && !fields[3].empty()) r.status = parse_number<std::int16_t>(fields[3], "status", line_no);
  return r;
}

std::string format_fixture_line(const SourceRow& row) {
  std::string s = std::to_string(row.element_id);
  s += '\t';
  s += format_iso(row.ts);
  s += '\t';
  s += format_double(row.value);
  s += '\t';
  if (row.status) s += std::to_string(*row.status);
  return s;
}

std::vector<SourceRow> parse_fixture(std::string_view text) {
  std::vector<SourceRow> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    rows.push_back(parse_fixture_line(line, line_no));
  }
  return rows;
}

void FixtureSource::read_after(std::optional<Timestamp> cursor, const RowSink& sink) {
  std::string text;
  try {
    text = read_file_text(path_);
  } catch (const IoError& e) {
    throw SourceError(std::string("fixture unreachable: ") + e.what());
  }
  std::vector<SourceRow> rows = parse_fixture(text);
  if (cursor) {
    std::erase_if(rows, [&](const SourceRow& r) { return r.ts <= *cursor; });
  }
  sort_by_time(rows);
  constexpr std::size_t kChunk = 1 << 16;
  for (std::size_t i = 0; i < rows.size(); i += kChunk) {
    sink(std::span<const SourceRow>(rows).subspan(i, std::min(kChunk, rows.size() - i)));
  }
}

void write_fixture(std::ostream& out, std::span<const SourceRow> rows) {
  std::string buf;
  for (const auto& r : rows) {
    buf += format_fixture_line(r);
    buf += '\n';
    if (buf.size() > (1 << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_fixture(const std::filesystem::path& path, std::span<const SourceRow> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write fixture " + path.string());
  write_fixture(out, rows);
  if (!out) throw IoError("failed writing fixture " + path.string());
}

}  // namespace dcs::sources
