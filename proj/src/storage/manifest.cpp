#include "dcs/storage/manifest.hpp"

#include "dcs/common/error.hpp"

namespace dcs::storage {

using nlohmann::json;

DataStats PartitionMeta::stats() const {
  DataStats s;
  s.rows = row_count;
  s.min_ts = min_ts;
  s.max_ts = max_ts;
  s.min_value = min_value;
  s.max_value = max_value;
  s.elements = element_ids;
  return s;
}

PartitionMeta PartitionMeta::from_stats(std::string table, Day day, std::vector<FileRef> files, const DataStats& s) {
  PartitionMeta p;
  p.table = std::move(table);
  p.day = day;
  p.files = std::move(files);
  p.row_count = s.rows;
  p.min_ts = s.min_ts;
  p.max_ts = s.max_ts;
  p.min_value = s.min_value;
  p.max_value = s.max_value;
  p.element_ids = s.elements;
  return p;
}

PartitionMeta PartitionMeta::with_file(FileRef file, const DataStats& file_stats) const {
  std::vector<FileRef> all = files;
  all.push_back(std::move(file));
  return from_stats(table, day, std::move(all), stats().merged(file_stats));
}

std::uint64_t Manifest::total_rows() const {
  std::uint64_t n = 0;
  for (const auto& [day, p] : partitions) n += p.row_count;
  return n;
}

json to_json(const PartitionMeta& p) {
  json files = json::array();
  for (const auto& f : p.files) files.push_back({{"path", f.path}, {"rows", f.rows}});
  json ids = json::array();
  for (auto [lo, hi] : p.element_ids.ranges()) ids.push_back(json::array({lo, hi}));
  json j{{"table", p.table}, {"day", format_date(p.day)}, {"files", files}, {"row_count", p.row_count}};
  if (p.row_count > 0) {
    j["min_ts"] = format_iso(p.min_ts);
    j["max_ts"] = format_iso(p.max_ts);
    j["min_value"] = p.min_value;
    j["max_value"] = p.max_value;
  } else {
    j["min_ts"] = j["max_ts"] = j["min_value"] = j["max_value"] = nullptr;
  }
  j["element_id_set_digest"] = ids;
  return j;
}

json to_json(const Watermark& w) {
  return {{"table", w.table},
          {"last_ts", w.last_ts ? json(format_iso(*w.last_ts)) : json(nullptr)},
          {"overlap", w.overlap.count()}};
}

json to_json(const Manifest& m) {
  json parts = json::object();
  for (const auto& [day, p] : m.partitions) parts[format_date(day)] = to_json(p);
  return {{"version", m.version},
          {"table", m.table},
          {"partitions", parts},
          {"watermark", to_json(m.watermark)},
          {"created_at", format_iso(m.created_at)}};
}

namespace {

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(std::string("manifest field missing: ") + name);
  return *it;
}

template <typename T>
T get_as(const json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest field '") + name + "': " + e.what());
  }
}

}  // namespace

PartitionMeta partition_from_json(const json& j) {
  PartitionMeta p;
  p.table = get_as<std::string>(j, "table");
  p.day = parse_date(get_as<std::string>(j, "day"));
  for (const auto& f : field(j, "files")) {
    p.files.push_back({get_as<std::string>(f, "path"), get_as<std::uint64_t>(f, "rows")});
  }
  p.row_count = get_as<std::uint64_t>(j, "row_count");
  if (p.row_count > 0) {
    p.min_ts = parse_iso(get_as<std::string>(j, "min_ts"));
    p.max_ts = parse_iso(get_as<std::string>(j, "max_ts"));
    p.min_value = get_as<double>(j, "min_value");
    p.max_value = get_as<double>(j, "max_value");
  }
  std::vector<ElementDigest::Range> ranges;
  for (const auto& r : field(j, "element_id_set_digest")) {
    if (!r.is_array() || r.size() != 2) throw ParseError("element_id_set_digest entries must be [first, last]");
    ranges.emplace_back(r[0].get<ElementId>(), r[1].get<ElementId>());
  }
  p.element_ids = ElementDigest::from_ranges(std::move(ranges));

  std::uint64_t sum = 0;
  for (const auto& f : p.files) sum += f.rows;
  if (sum != p.row_count) throw ParseError("partition " + format_date(p.day) + ": row_count does not match files");
  if (p.row_count > 0 && (day_of(p.min_ts) != p.day || day_of(p.max_ts) != p.day || p.min_ts > p.max_ts))
    throw ParseError("partition " + format_date(p.day) + ": timestamp bounds outside the day");
  return p;
}

Watermark watermark_from_json(const json& j) {
  Watermark w;
  w.table = get_as<std::string>(j, "table");
  const json& last = field(j, "last_ts");
  if (!last.is_null()) w.last_ts = parse_iso(last.get<std::string>());
  w.overlap = Duration{get_as<std::int64_t>(j, "overlap")};
  return w;
}

Manifest manifest_from_json(const json& j) {
  Manifest m;
  m.version = get_as<std::uint64_t>(j, "version");
  m.table = get_as<std::string>(j, "table");
  for (const auto& [key, value] : field(j, "partitions").items()) {
    PartitionMeta p = partition_from_json(value);
    if (format_date(p.day) != key) throw ParseError("partition key " + key + " does not match its day");
    m.partitions.emplace(p.day, std::move(p));
  }
  m.watermark = watermark_from_json(field(j, "watermark"));
  m.created_at = parse_iso(get_as<std::string>(j, "created_at"));
  return m;
}

}  // namespace dcs::storage
