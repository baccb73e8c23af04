#include "dcs/query/last_update.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace dcs::query {

namespace {

class GapTracker {
 public:
  GapTracker(TimeRange range, Duration min_gap) : range_(range), min_gap_(min_gap) {}

  void observe(ElementId id, Timestamp ts) {
    auto [it, first] = last_.try_emplace(id, ts);
    Timestamp from = first ? range_.lo : it->second;
    if (ts - from > min_gap_) gaps_[id].push_back({from, ts});
    else if (first) gaps_.try_emplace(id);
    it->second = std::max(it->second, ts);
  }

  GapIndex finish(const std::optional<ElementSet>& elements) {
    for (auto& [id, _] : last_) gaps_.try_emplace(id);
    if (elements) {
      for (ElementId id : *elements) {
        if (!last_.count(id) && range_.hi - range_.lo > min_gap_) gaps_[id].push_back({range_.lo, range_.hi});
      }
    }
    return std::move(gaps_);
  }

 private:
  TimeRange range_;
  Duration min_gap_;
  std::unordered_map<ElementId, Timestamp> last_;
  GapIndex gaps_;
};

}  // namespace

LastUpdateIndex last_update_index(const storage::Table& table, const storage::Manifest& manifest, TimeRange range,
                                  const std::optional<ElementSet>& elements, storage::ScanStats* stats) {
  LastUpdateIndex out;
  storage::ScanStats total;
  total.partitions_total = manifest.partitions.size();
  std::optional<ElementSet> wanted;
  if (elements) wanted = make_element_set(*elements);

  auto parts = storage::prune_partitions(manifest, range, nullptr, wanted ? &*wanted : nullptr);
  for (auto p = parts.rbegin(); p != parts.rend(); ++p) {
    ElementSet candidates;
    for (ElementId id : p->element_ids.expand()) {
      if (out.count(id)) continue;
      if (wanted && !std::binary_search(wanted->begin(), wanted->end(), id)) continue;
      candidates.push_back(id);
    }
    if (candidates.empty()) continue;

    storage::Manifest single;
    single.table = manifest.table;
    single.partitions.emplace(p->day, *p);
    storage::ScanRequest req;
    req.range = range;
    req.elements = std::move(candidates);
    req.projection = {storage::Field::element_id, storage::Field::ts};
    storage::ScanStats s = storage::scan(table, single, req, [&](const storage::RecordBatch& b) {
      for (std::size_t i = 0; i < b.size(); ++i) {
        Timestamp ts = from_micros(b.ts[i]);
        auto [it, inserted] = out.try_emplace(b.element_id[i], ts);
        if (!inserted) it->second = std::max(it->second, ts);
      }
    });
    total.partitions_opened += s.partitions_opened;
    total.rows_scanned += s.rows_scanned;
    total.rows_returned += s.rows_returned;
  }
  if (stats) *stats = total;
  return out;
}

GapIndex gap_index(const storage::Table& table, const storage::Manifest& manifest, TimeRange range,
                   const std::optional<ElementSet>& elements, Duration min_gap, storage::ScanStats* stats) {
  GapTracker tracker(range, min_gap);
  storage::ScanRequest req;
  req.range = range;
  if (elements) req.elements = make_element_set(*elements);
  req.projection = {storage::Field::element_id, storage::Field::ts};
  storage::ScanStats s = storage::scan(table, manifest, req, [&](const storage::RecordBatch& b) {
    for (std::size_t i = 0; i < b.size(); ++i) tracker.observe(b.element_id[i], from_micros(b.ts[i]));
  });
  if (stats) *stats = s;
  return tracker.finish(req.elements);
}

GapIndex gap_index(std::span<const EventRecord> records, TimeRange range, const std::optional<ElementSet>& elements,
                   Duration min_gap) {
  std::optional<ElementSet> wanted;
  if (elements) wanted = make_element_set(*elements);
  std::vector<EventRecord> rows;
  for (const auto& r : records) {
    if (!range.contains(r.ts)) continue;
    if (wanted && !std::binary_search(wanted->begin(), wanted->end(), r.element_id)) continue;
    rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(), key_less);
  GapTracker tracker(range, min_gap);
  for (const auto& r : rows) tracker.observe(r.element_id, r.ts);
  return tracker.finish(wanted);
}

}  // namespace dcs::query
