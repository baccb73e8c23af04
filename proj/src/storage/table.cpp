#include "dcs/storage/table.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "dcs/common/error.hpp"
#include "dcs/common/file_util.hpp"

namespace dcs::storage {

namespace fs = std::filesystem;

namespace {

std::string manifest_name(std::uint64_t version) { return "manifest-" + std::to_string(version) + ".json"; }

std::optional<std::uint64_t> parse_number(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Version encoded in "manifest-<v>.json", if the name has that shape.
std::optional<std::uint64_t> manifest_version_of(const fs::path& p) {
  std::string name = p.filename().string();
  const std::string prefix = "manifest-";
  const std::string suffix = ".json";
  if (name.size() <= prefix.size() + suffix.size() || name.rfind(prefix, 0) != 0 ||
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
    return std::nullopt;
  return parse_number(std::string_view(name).substr(prefix.size(), name.size() - prefix.size() - suffix.size()));
}

std::optional<std::uint64_t> part_seq_of(const fs::path& p) {
  std::string name = p.filename().string();
  if (name.rfind("part-", 0) != 0) return std::nullopt;
  auto dot = name.find('.');
  if (dot == std::string::npos) return std::nullopt;
  return parse_number(std::string_view(name).substr(5, dot - 5));
}

std::string day_dir_name(Day d) { return "date=" + format_date(d); }

bool is_tmp(const fs::path& p) { return p.extension() == ".tmp"; }

}  // namespace

Table::Table(fs::path root, std::string name) : root_(std::move(root)), name_(std::move(name)) {
  if (name_.empty() || name_.find('/') != std::string::npos || name_[0] == '.' || name_[0] == '_')
    throw ValidationError("invalid table name '" + name_ + "'");
  dir_ = root_ / name_;
}

std::uint64_t Table::current_version() const {
  fs::path current = manifest_dir() / "CURRENT";
  std::error_code ec;
  if (!fs::exists(current, ec)) return 0;
  auto v = parse_number(read_file_text(current));
  if (!v) throw IoError("corrupt CURRENT file in " + manifest_dir().string());
  return *v;
}

std::shared_ptr<const Manifest> Table::current() const { return at_version(current_version()); }

std::shared_ptr<const Manifest> Table::at_version(std::uint64_t version) const {
  if (version == 0) {
    auto m = std::make_shared<Manifest>();
    m->table = name_;
    m->watermark.table = name_;
    return m;
  }
  fs::path path = manifest_dir() / manifest_name(version);
  std::error_code ec;
  if (!fs::exists(path, ec) || version > current_version())
    throw IoError("manifest version " + std::to_string(version) + " of table " + name_ + " is not available");
  try {
    auto m = std::make_shared<Manifest>(manifest_from_json(nlohmann::json::parse(read_file_text(path))));
    if (m->version != version || m->table != name_) throw ParseError("manifest header does not match its file name");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint64_t> Table::committed_versions() const {
  std::vector<std::uint64_t> out;
  std::uint64_t current = current_version();
  std::error_code ec;
  if (!fs::exists(manifest_dir(), ec)) return out;
  for (const auto& entry : fs::directory_iterator(manifest_dir())) {
    if (auto v = manifest_version_of(entry.path()); v && *v <= current) out.push_back(*v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TableWriter Table::open_writer(WriteOptions options) const {
  fs::create_directories(manifest_dir());
  fs::path lock_path = manifest_dir() / "LOCK";
  int fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT, 0644);
  if (fd < 0) throw IoError("cannot open lock file " + lock_path.string());
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    throw CommitConflictError("table " + name_ + " is locked by another writer");
  }
  TableWriter w(*this, options, fd);
  w.recover();
  return w;
}

TableWriter::TableWriter(Table table, WriteOptions options, int lock_fd)
    : table_(std::move(table)), options_(options), lock_fd_(lock_fd) {}

TableWriter::TableWriter(TableWriter&& other) noexcept
    : table_(other.table_), options_(other.options_), lock_fd_(other.lock_fd_), fault_hook_(std::move(other.fault_hook_)) {
  other.lock_fd_ = -1;
}

TableWriter& TableWriter::operator=(TableWriter&& other) noexcept {
  if (this != &other) {
    if (lock_fd_ >= 0) ::close(lock_fd_);
    table_ = other.table_;
    options_ = other.options_;
    lock_fd_ = other.lock_fd_;
    fault_hook_ = std::move(other.fault_hook_);
    other.lock_fd_ = -1;
  }
  return *this;
}

TableWriter::~TableWriter() {
  if (lock_fd_ >= 0) ::close(lock_fd_);  // releases the flock
}

PartitionMeta TableWriter::write_partition(Day day, std::span<const EventRecord> records) {
  for (const auto& r : records) {
    if (day_of(r.ts) != day)
      throw PartitionBoundaryError("record at " + format_iso(r.ts) + " does not belong to partition " + format_date(day));
  }
  PartitionMeta meta;
  meta.table = table_.name();
  meta.day = day;
  if (records.empty()) return meta;

  std::vector<EventRecord> rows = sort_dedup_last_wins({records.begin(), records.end()});

  fs::path dir = table_.dir() / day_dir_name(day);
  fs::create_directories(dir);
  std::uint64_t seq = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (auto s = part_seq_of(entry.path())) seq = std::max(seq, *s);
  }
  char name[32];
  std::snprintf(name, sizeof name, "part-%06llu.dcol", static_cast<unsigned long long>(seq + 1));
  fs::path rel = fs::path(day_dir_name(day)) / name;

  DataStats stats = write_column_file(table_.dir() / rel, rows, options_);
  return PartitionMeta::from_stats(table_.name(), day, {FileRef{rel.generic_string(), stats.rows}}, stats);
}

Manifest TableWriter::commit(std::uint64_t base_version, std::vector<PartitionMeta> changes, Watermark watermark,
                             CommitMode mode) {
  hit(CommitStage::data_written);

  std::uint64_t current = table_.current_version();
  if (current != base_version)
    throw CommitConflictError("table " + table_.name() + " moved from version " + std::to_string(base_version) +
                              " to " + std::to_string(current));

  auto base = table_.at_version(base_version);
  Manifest next;
  next.version = base_version + 1;
  next.table = table_.name();
  if (mode == CommitMode::merge) next.partitions = base->partitions;
  for (auto& p : changes) {
    if (p.table != table_.name()) throw ValidationError("partition for table " + p.table + " committed to " + table_.name());
    for (const auto& f : p.files) {
      std::error_code ec;
      if (!fs::exists(table_.file_path(f), ec)) throw IoError("commit references missing file " + f.path);
    }
    if (p.row_count == 0) next.partitions.erase(p.day);
    else next.partitions[p.day] = std::move(p);
  }
  if (base->watermark.last_ts && watermark.last_ts && *watermark.last_ts < *base->watermark.last_ts)
    throw ValidationError("watermark may not move backwards");
  watermark.table = table_.name();
  next.watermark = std::move(watermark);
  next.created_at = std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now());

  fs::path manifest_path = table_.manifest_dir() / manifest_name(next.version);
  fs::path staged = write_temp_file(manifest_path, to_json(next).dump(1));
  hit(CommitStage::manifest_staged);
  publish_file(staged, manifest_path);
  hit(CommitStage::manifest_published);
  fs::path current_path = table_.manifest_dir() / "CURRENT";
  fs::path staged_current = write_temp_file(current_path, std::to_string(next.version) + "\n");
  hit(CommitStage::current_staged);
  publish_file(staged_current, current_path);
  return next;
}

void TableWriter::recover() {
  std::uint64_t current = table_.current_version();
  std::error_code ec;
  if (!fs::exists(table_.dir(), ec)) return;
  std::vector<fs::path> doomed;
  for (const auto& entry : fs::recursive_directory_iterator(table_.dir())) {
    const fs::path& p = entry.path();
    if (!entry.is_regular_file()) continue;
    if (is_tmp(p)) doomed.push_back(p);
    else if (auto v = manifest_version_of(p); v && *v > current) doomed.push_back(p);
  }
  for (const auto& p : doomed) fs::remove(p, ec);
}

std::size_t TableWriter::collect_garbage(std::size_t keep_versions) {
  std::vector<std::uint64_t> versions = table_.committed_versions();
  keep_versions = std::max<std::size_t>(keep_versions, 1);
  std::set<std::string> live;
  std::size_t first_kept = versions.size() > keep_versions ? versions.size() - keep_versions : 0;
  for (std::size_t i = first_kept; i < versions.size(); ++i) {
    auto m = table_.at_version(versions[i]);
    for (const auto& [day, p] : m->partitions)
      for (const auto& f : p.files) live.insert(f.path);
  }
  std::size_t removed = 0;
  std::error_code ec;
  for (std::size_t i = 0; i < first_kept; ++i) {
    if (fs::remove(table_.manifest_dir() / manifest_name(versions[i]), ec)) ++removed;
  }
  std::vector<fs::path> dead;
  for (const auto& entry : fs::recursive_directory_iterator(table_.dir())) {
    if (!entry.is_regular_file() || !part_seq_of(entry.path())) continue;
    std::string rel = fs::relative(entry.path(), table_.dir()).generic_string();
    if (!live.count(rel)) dead.push_back(entry.path());
  }
  for (const auto& p : dead) {
    if (fs::remove(p, ec)) ++removed;
  }
  for (const auto& entry : fs::directory_iterator(table_.dir())) {
    if (entry.is_directory() && entry.path().filename().string().rfind("date=", 0) == 0 && fs::is_empty(entry.path()))
      fs::remove(entry.path(), ec);
  }
  return removed;
}

}  // namespace dcs::storage
