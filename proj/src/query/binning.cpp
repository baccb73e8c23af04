#include "dcs/query/binning.hpp"

#include <algorithm>
#include <cmath>

#include "dcs/common/error.hpp"
#include "dcs/kernels/kernels.hpp"

namespace dcs::query {

BinAccumulator::BinAccumulator(Duration width) : width_(width) {
  if (width <= Duration::zero()) throw ValidationError("bin width must be positive");
}

void BinAccumulator::add_slice(ElementId id, std::int64_t bin_start, std::span<const std::int64_t> ts,
                               std::span<const double> values) {
  const auto& k = kernels::active();
  kernels::Extrema e = k.extrema(values);
  const double n = static_cast<double>(values.size());
  Partial p;
  p.count = values.size();
  p.min = e.min;
  p.max = e.max;
  if (e.min == e.max) {
    p.mean = e.min;
    p.m2 = 0.0;
  } else {
    p.mean = std::clamp(e.sum / n, e.min, e.max);
    p.m2 = k.sum_sq_dev(values, p.mean);
  }
  // Slices are ts-ordered, so the last row holds the latest value.
  p.last_ts = ts.back();
  p.last = values.back();

  auto [it, inserted] = partials_.try_emplace(Key{id, bin_start}, p);
  if (inserted) return;
  Partial& a = it->second;
  const double na = static_cast<double>(a.count);
  const double total = na + n;
  const double delta = p.mean - a.mean;
  double mean = a.mean + delta * (n / total);
  a.m2 = a.m2 + p.m2 + delta * delta * (na * n / total);
  a.count += p.count;
  a.min = std::min(a.min, p.min);
  a.max = std::max(a.max, p.max);
  a.mean = a.min == a.max ? a.min : std::clamp(mean, a.min, a.max);
  if (a.min == a.max) a.m2 = 0.0;
  if (p.last_ts >= a.last_ts) {
    a.last_ts = p.last_ts;
    a.last = p.last;
  }
}

void BinAccumulator::add(const storage::RecordBatch& batch) {
  if (batch.empty()) return;
  if (batch.value.size() != batch.size()) throw ValidationError("binning needs the value column");
  const std::int64_t w = width_.count();
  std::size_t i = 0;
  const std::size_t n = batch.size();
  while (i < n) {
    const ElementId id = batch.element_id[i];
    const std::int64_t start = to_micros(align_down(from_micros(batch.ts[i]), width_));
    const std::int64_t end = start + w;
    std::size_t j = i + 1;
    while (j < n && batch.element_id[j] == id && batch.ts[j] < end && batch.ts[j] >= start) ++j;
    add_slice(id, start, std::span(batch.ts.data() + i, j - i), std::span(batch.value.data() + i, j - i));
    i = j;
  }
}

void BinAccumulator::add(std::span<const EventRecord> records) {
  std::vector<const EventRecord*> order;
  order.reserve(records.size());
  for (const auto& r : records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const EventRecord* a, const EventRecord* b) { return key_less(*a, *b); });
  storage::RecordBatch batch;
  for (const EventRecord* r : order) batch.append_row(*r, {storage::Field::value});
  add(batch);
}

BinnedMap BinAccumulator::finish() const {
  BinnedMap out;
  for (const auto& [key, p] : partials_) {
    BinnedSeries& s = out[key.first];
    s.element_id = key.first;
    s.bin_width = width_;
    Bin b;
    b.bin_start = from_micros(key.second);
    b.count = p.count;
    b.min = p.min;
    b.max = p.max;
    b.mean = p.mean;
    b.std = std::sqrt(std::max(0.0, p.m2) / static_cast<double>(p.count));
    b.last = p.last;
    s.bins.push_back(b);
  }
  return out;
}

BinnedMap time_bin(std::span<const EventRecord> records, Duration width) {
  BinAccumulator acc(width);
  acc.add(records);
  return acc.finish();
}

std::pair<BinnedMap, storage::ScanStats> time_bin(const storage::Table& table, const storage::Manifest& manifest,
                                                  storage::ScanRequest request, Duration width) {
  BinAccumulator acc(width);
  request.projection = {storage::Field::element_id, storage::Field::ts, storage::Field::value};
  storage::ScanStats stats = storage::scan(table, manifest, request, [&](const storage::RecordBatch& b) { acc.add(b); });
  return {acc.finish(), stats};
}

std::uint64_t total_count(const BinnedMap& binned) {
  std::uint64_t n = 0;
  for (const auto& [id, s] : binned)
    for (const auto& b : s.bins) n += b.count;
  return n;
}

}  // namespace dcs::query
