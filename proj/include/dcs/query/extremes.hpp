#pragma once

#include <map>
#include <span>
#include <utility>

#include "dcs/common/record.hpp"
#include "dcs/storage/record_batch.hpp"

namespace dcs::query {

enum class ExtremeKind { max, min };

using DailyExtremes = std::map<std::pair<ElementId, Day>, double>;

/// Per (element, UTC day) maximum or minimum; days without data are absent.
DailyExtremes daily_extreme(std::span<const EventRecord> records, ExtremeKind kind);

class DailyExtremeAccumulator {
 public:
  explicit DailyExtremeAccumulator(ExtremeKind kind) : kind_(kind) {}
  void add(const EventRecord& r);
  void add(const storage::RecordBatch& batch);
  const DailyExtremes& result() const { return out_; }

 private:
  void fold(ElementId id, Day day, double v);

  ExtremeKind kind_;
  DailyExtremes out_;
};

}  // namespace dcs::query
