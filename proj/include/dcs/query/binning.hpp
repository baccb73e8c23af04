#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "dcs/common/record.hpp"
#include "dcs/storage/record_batch.hpp"
#include "dcs/storage/scan.hpp"

namespace dcs::query {

/// Aggregates of one element over one grid-aligned window. `std` is the
/// population standard deviation; `last` is the value with the latest ts.
struct Bin {
  Timestamp bin_start{};
  std::uint64_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;
  double last = 0.0;
};

struct BinnedSeries {
  ElementId element_id = 0;
  Duration bin_width{};
  std::vector<Bin> bins;  ///< sorted by bin_start, empty bins omitted
};

using BinnedMap = std::map<ElementId, BinnedSeries>;

/// Streaming binner. Bins are anchored at the Unix epoch, so daily bins
/// coincide with UTC days. Within a contiguous slice the mean and squared
/// deviations are computed in two passes; slices of the same bin arriving
/// in different batches are combined with the pairwise update formula.
class BinAccumulator {
 public:
  /// Throws ValidationError unless width > 0.
  explicit BinAccumulator(Duration width);

  /// Rows must be ordered by (element_id, ts) within the batch (scan order).
  void add(const storage::RecordBatch& batch);
  /// Any order.
  void add(std::span<const EventRecord> records);

  BinnedMap finish() const;

 private:
  struct Partial {
    std::uint64_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
    std::int64_t last_ts = 0;
    double last = 0.0;
  };
  using Key = std::pair<ElementId, std::int64_t>;

  void add_slice(ElementId id, std::int64_t bin_start, std::span<const std::int64_t> ts, std::span<const double> values);

  Duration width_;
  std::map<Key, Partial> partials_;
};

BinnedMap time_bin(std::span<const EventRecord> records, Duration width);

/// Scans with `request` (value column forced on) and bins the result.
std::pair<BinnedMap, storage::ScanStats> time_bin(const storage::Table& table, const storage::Manifest& manifest,
                                                  storage::ScanRequest request, Duration width);

std::uint64_t total_count(const BinnedMap& binned);

}  // namespace dcs::query
