#pragma once

// On-disk layout of a table:
//
//   <root>/<table>/date=YYYY-MM-DD/part-<seq>.dcol
//   <root>/<table>/_manifests/manifest-<version>.json
//   <root>/<table>/_manifests/CURRENT        latest committed version
//   <root>/<table>/_manifests/LOCK           single-writer advisory lock
//
// A commit writes data files first, then the manifest, and becomes visible
// when CURRENT is atomically replaced. Anything written after the last
// CURRENT update is ignored by readers and removed by recovery.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dcs/common/record.hpp"
#include "dcs/storage/column_file.hpp"
#include "dcs/storage/manifest.hpp"

namespace dcs::storage {

class TableWriter;

class Table {
 public:
  Table(std::filesystem::path root, std::string name);

  const std::string& name() const { return name_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path manifest_dir() const { return dir_ / "_manifests"; }
  std::filesystem::path file_path(const FileRef& f) const { return dir_ / f.path; }

  /// Latest committed version; 0 for a table that was never committed.
  std::uint64_t current_version() const;
  std::shared_ptr<const Manifest> current() const;
  /// Throws IoError if `version` was never committed or has been collected.
  std::shared_ptr<const Manifest> at_version(std::uint64_t version) const;
  std::vector<std::uint64_t> committed_versions() const;

  /// Takes the writer lock (CommitConflictError if another writer holds it)
  /// and discards uncommitted leftovers of crashed commits.
  TableWriter open_writer(WriteOptions options = {}) const;

 private:
  std::filesystem::path root_;
  std::string name_;
  std::filesystem::path dir_;
};

enum class CommitMode {
  merge,        ///< changes replace their days; other days carried over
  replace_all,  ///< the new version holds exactly the given partitions
};

/// Points in the commit sequence where a fault hook runs. An exception
/// thrown from the hook aborts the commit at that point, as a crash would.
enum class CommitStage {
  data_written,        ///< partition files are on disk
  manifest_staged,     ///< manifest-<v>.json.tmp is written
  manifest_published,  ///< manifest-<v>.json exists, CURRENT still old
  current_staged,      ///< CURRENT.tmp is written, not yet renamed
};

using FaultHook = std::function<void(CommitStage)>;

/// Exclusive write access to one table for the lifetime of the object.
class TableWriter {
 public:
  TableWriter(const TableWriter&) = delete;
  TableWriter& operator=(const TableWriter&) = delete;
  TableWriter(TableWriter&& other) noexcept;
  TableWriter& operator=(TableWriter&& other) noexcept;
  ~TableWriter();

  const Table& table() const { return table_; }

  /// Writes one new file for `day`. Records may arrive unsorted; they are
  /// stored sorted by (element_id, ts) with duplicate keys collapsed, last
  /// one wins. An empty input writes nothing and returns row_count 0.
  PartitionMeta write_partition(Day day, std::span<const EventRecord> records);

  /// Publishes version base_version + 1. Throws CommitConflictError if the
  /// table moved past `base_version` in the meantime.
  Manifest commit(std::uint64_t base_version, std::vector<PartitionMeta> changes, Watermark watermark,
                  CommitMode mode = CommitMode::merge);

  /// Removes uncommitted manifests and temp files. Runs on open.
  void recover();

  /// Deletes manifests older than the newest `keep_versions` and data files
  /// no retained manifest references. Readers pinned to a collected version
  /// lose access to its files. Returns the number of files removed.
  std::size_t collect_garbage(std::size_t keep_versions);

  void set_fault_hook(FaultHook hook) { fault_hook_ = std::move(hook); }

 private:
  friend class Table;
  TableWriter(Table table, WriteOptions options, int lock_fd);

  void hit(CommitStage stage) const {
    if (fault_hook_) fault_hook_(stage);
  }

  Table table_;
  WriteOptions options_;
  int lock_fd_ = -1;
  FaultHook fault_hook_;
};

}  // namespace dcs::storage
