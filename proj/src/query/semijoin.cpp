#include "dcs/query/semijoin.hpp"

namespace dcs::query {

std::vector<EventRecord> interval_semijoin(std::span<const EventRecord> records, const IntervalSet& intervals,
                                           JoinMode mode) {
  const bool keep = mode == JoinMode::keep;
  std::vector<EventRecord> out;
  for (const auto& r : records) {
    if (intervals.contains(r.ts) == keep) out.push_back(r);
  }
  return out;
}

BinnedMap interval_semijoin(const BinnedMap& binned, const IntervalSet& intervals, JoinMode mode) {
  const bool keep = mode == JoinMode::keep;
  BinnedMap out;
  for (const auto& [id, series] : binned) {
    BinnedSeries s{series.element_id, series.bin_width, {}};
    for (const auto& b : series.bins) {
      if (intervals.contains(b.bin_start) == keep) s.bins.push_back(b);
    }
    if (!s.bins.empty()) out.emplace(id, std::move(s));
  }
  return out;
}

}  // namespace dcs::query
