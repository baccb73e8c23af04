#pragma once

#include <map>
#include <optional>
#include <vector>

#include "dcs/query/interval_set.hpp"
#include "dcs/storage/scan.hpp"

namespace dcs::query {

using LastUpdateIndex = std::map<ElementId, Timestamp>;

/// Latest ts per element within `range`. Walks partitions newest first and
/// opens a partition only if its element digest still holds an element
/// whose latest update is unknown.
LastUpdateIndex last_update_index(const storage::Table& table, const storage::Manifest& manifest, TimeRange range,
                                  const std::optional<ElementSet>& elements = std::nullopt,
                                  storage::ScanStats* stats = nullptr);

/// Silent periods per element: [range.lo, first record), [record, next
/// record) and, for requested elements without any data, the whole range.
/// Only periods longer than `min_gap` are kept. The tail after the last
/// record is not included; see last_update_index.
using GapIndex = std::map<ElementId, std::vector<Interval>>;

GapIndex gap_index(const storage::Table& table, const storage::Manifest& manifest, TimeRange range,
                   const std::optional<ElementSet>& elements, Duration min_gap, storage::ScanStats* stats = nullptr);

/// Same over in-memory records (any order).
GapIndex gap_index(std::span<const EventRecord> records, TimeRange range, const std::optional<ElementSet>& elements,
                   Duration min_gap);

}  // namespace dcs::query
