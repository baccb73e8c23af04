#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "dcs/common/time.hpp"

namespace dcs {

using ElementId = std::uint32_t;

/// One archived measurement; the row type of the event history table.
struct EventRecord {
  ElementId element_id = 0;
  Timestamp ts{};
  double value = 0.0;
  std::optional<std::int16_t> status;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Storage order within a partition.
inline bool key_less(const EventRecord& a, const EventRecord& b) {
  return std::tie(a.element_id, a.ts) < std::tie(b.element_id, b.ts);
}
inline bool same_key(const EventRecord& a, const EventRecord& b) {
  return a.element_id == b.element_id && a.ts == b.ts;
}

/// Sorted, duplicate-free list of element ids.
using ElementSet = std::vector<ElementId>;

inline ElementSet make_element_set(std::vector<ElementId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

/// Sorts by (element_id, ts) and collapses duplicate keys; among duplicates
/// the one appearing last in the input survives.
inline std::vector<EventRecord> sort_dedup_last_wins(std::vector<EventRecord> rows) {
  std::stable_sort(rows.begin(), rows.end(), key_less);
  std::vector<EventRecord> out;
  out.reserve(rows.size());
  for (auto& r : rows) {
    if (!out.empty() && same_key(out.back(), r)) out.back() = r;
    else out.push_back(r);
  }
  return out;
}

}  // namespace dcs
