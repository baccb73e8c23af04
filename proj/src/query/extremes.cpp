#include "dcs/query/extremes.hpp"

#include <algorithm>

#include "dcs/common/error.hpp"

namespace dcs::query {

void DailyExtremeAccumulator::fold(ElementId id, Day day, double v) {
  auto [it, inserted] = out_.try_emplace({id, day}, v);
  if (!inserted) it->second = kind_ == ExtremeKind::max ? std::max(it->second, v) : std::min(it->second, v);
}

void DailyExtremeAccumulator::add(const EventRecord& r) { fold(r.element_id, day_of(r.ts), r.value); }

void DailyExtremeAccumulator::add(const storage::RecordBatch& batch) {
  if (batch.value.size() != batch.size()) throw ValidationError("daily extremes need the value column");
  for (std::size_t i = 0; i < batch.size(); ++i) fold(batch.element_id[i], day_of(from_micros(batch.ts[i])), batch.value[i]);
}

DailyExtremes daily_extreme(std::span<const EventRecord> records, ExtremeKind kind) {
  DailyExtremeAccumulator acc(kind);
  for (const auto& r : records) acc.add(r);
  return acc.result();
}

}  // namespace dcs::query
