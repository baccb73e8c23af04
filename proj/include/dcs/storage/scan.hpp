#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dcs/common/record.hpp"
#include "dcs/storage/manifest.hpp"
#include "dcs/storage/record_batch.hpp"
#include "dcs/storage/table.hpp"

namespace dcs::storage {

struct ScanStats {
  std::uint64_t partitions_total = 0;
  std::uint64_t partitions_opened = 0;
  std::uint64_t rows_scanned = 0;
  std::uint64_t rows_returned = 0;

  friend bool operator==(const ScanStats&, const ScanStats&) = default;
};

struct ScanRequest {
  TimeRange range;
  std::optional<ValuePredicate> value;
  std::optional<ElementSet> elements;  ///< sorted; nullopt means all elements
  Projection projection = Projection::all();
  unsigned parallelism = 1;  ///< partitions decoded concurrently
};

/// Partitions whose statistics cannot rule out a matching row, in day order.
/// Sound: a partition holding any matching row is always returned.
std::vector<PartitionMeta> prune_partitions(const Manifest& manifest, TimeRange range,
                                            const ValuePredicate* value = nullptr,
                                            const ElementSet* elements = nullptr);

using BatchSink = std::function<void(const RecordBatch&)>;

/// Streams matching rows in (day, element_id, ts) order. Filters are applied
/// while decoding; row groups whose statistics refute the predicates are not
/// decompressed. Throws ValidationError for an empty projection or an empty
/// range, ScanError for missing or corrupt files.
ScanStats scan(const Table& table, const Manifest& manifest, const ScanRequest& request, const BatchSink& sink);

std::pair<std::vector<EventRecord>, ScanStats> scan_records(const Table& table, const Manifest& manifest,
                                                            const ScanRequest& request);

}  // namespace dcs::storage
