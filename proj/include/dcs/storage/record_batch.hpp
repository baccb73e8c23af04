#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dcs/common/record.hpp"
#include "dcs/kernels/kernels.hpp"

namespace dcs::storage {

enum class Field : std::uint8_t { element_id = 1, ts = 2, value = 4, status = 8 };

/// Set of fields a scan materialises. element_id and ts are always decoded
/// because ordering and filtering depend on them.
class Projection {
 public:
  constexpr Projection() = default;
  constexpr Projection(std::initializer_list<Field> fields) {
    for (Field f : fields) mask_ |= static_cast<std::uint8_t>(f);
  }
  static constexpr Projection all() { return {Field::element_id, Field::ts, Field::value, Field::status}; }

  constexpr bool has(Field f) const { return (mask_ & static_cast<std::uint8_t>(f)) != 0; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr std::uint8_t mask() const { return mask_; }

 private:
  std::uint8_t mask_ = 0;
};

/// Columnar slice of a partition, rows in (element_id, ts) order.
/// Columns not in the projection are left empty.
struct RecordBatch {
  std::vector<ElementId> element_id;
  std::vector<std::int64_t> ts;
  std::vector<double> value;
  std::vector<std::int16_t> status;
  std::vector<std::uint8_t> status_valid;

  std::size_t size() const { return ts.size(); }
  bool empty() const { return ts.empty(); }

  EventRecord row(std::size_t i) const {
    EventRecord r;
    r.element_id = element_id[i];
    r.ts = from_micros(ts[i]);
    if (!value.empty()) r.value = value[i];
    if (!status_valid.empty() && status_valid[i]) r.status = status[i];
    return r;
  }

  void append_row(const EventRecord& r, Projection p) {
    element_id.push_back(r.element_id);
    ts.push_back(to_micros(r.ts));
    if (p.has(Field::value)) value.push_back(r.value);
    if (p.has(Field::status)) {
      status.push_back(r.status.value_or(0));
      status_valid.push_back(r.status ? 1 : 0);
    }
  }
};

/// Predicate on the measured value, e.g. "value > 0.45".
struct ValuePredicate {
  kernels::ValueBounds bounds;

  static ValuePredicate greater_than(double v) { return {{v, std::numeric_limits<double>::infinity(), true, false}}; }
  static ValuePredicate at_least(double v) { return {{v, std::numeric_limits<double>::infinity(), false, false}}; }
  static ValuePredicate less_than(double v) { return {{-std::numeric_limits<double>::infinity(), v, false, true}}; }
  static ValuePredicate at_most(double v) { return {{-std::numeric_limits<double>::infinity(), v, false, false}}; }
  static ValuePredicate between(double lo, double hi) { return {{lo, hi, false, false}}; }

  bool matches(double v) const { return bounds.matches(v); }

  /// False only if no value in [min, max] can satisfy the predicate.
  bool may_match(double min, double max) const {
    const auto& b = bounds;
    bool above_lo = b.lo_open ? max > b.lo : max >= b.lo;
    bool below_hi = b.hi_open ? min < b.hi : min <= b.hi;
    return above_lo && below_hi;
  }
};

}  // namespace dcs::storage
