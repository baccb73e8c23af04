#include "dcs/storage/scan.hpp"

#include <algorithm>
#include <future>
#include <numeric>

#include "dcs/common/error.hpp"
#include "dcs/kernels/kernels.hpp"

namespace dcs::storage {

namespace {

struct PartitionResult {
  std::vector<RecordBatch> batches;
  std::uint64_t rows_scanned = 0;
};

void gather(const RecordBatch& in, const std::uint32_t* idx, std::size_t n, std::size_t offset, Projection p,
            RecordBatch& out) {
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t i = offset + idx[k];
    out.element_id.push_back(in.element_id[i]);
    out.ts.push_back(in.ts[i]);
    if (p.has(Field::value)) out.value.push_back(in.value[i]);
    if (p.has(Field::status)) {
      out.status.push_back(in.status[i]);
      out.status_valid.push_back(in.status_valid[i]);
    }
  }
}

/// Applies time, value and element filters to a decoded group.
RecordBatch filter_group(const RecordBatch& in, const ScanRequest& req, std::vector<std::uint32_t>& scratch) {
  const auto& k = kernels::active();
  const std::int64_t lo = to_micros(req.range.lo);
  const std::int64_t hi = to_micros(req.range.hi);
  RecordBatch out;
  scratch.resize(in.size());

  auto select = [&](std::size_t begin, std::size_t end) {
    std::span<const std::int64_t> ts(in.ts.data() + begin, end - begin);
    std::size_t n = req.value ? k.select_time_value(ts, std::span(in.value.data() + begin, end - begin), lo, hi,
                                                    req.value->bounds, scratch.data())
                              : k.select_time(ts, lo, hi, scratch.data());
    gather(in, scratch.data(), n, begin, req.projection, out);
  };

  if (!req.elements) {
    select(0, in.size());
    return out;
  }
  // Rows are grouped by element; visit only the runs of requested ids.
  auto first = in.element_id.begin();
  for (ElementId id : *req.elements) {
    auto [b, e] = std::equal_range(first, in.element_id.end(), id);
    if (b != e) select(static_cast<std::size_t>(b - in.element_id.begin()), static_cast<std::size_t>(e - in.element_id.begin()));
    first = e;
  }
  return out;
}

bool group_may_match(const RowGroupInfo& g, const ScanRequest& req) {
  if (!req.range.overlaps_closed(from_micros(g.min_ts), from_micros(g.max_ts))) return false;
  if (req.value && !req.value->may_match(g.min_value, g.max_value)) return false;
  if (req.elements) {
    auto it = std::lower_bound(req.elements->begin(), req.elements->end(), g.min_element);
    if (it == req.elements->end() || *it > g.max_element) return false;
  }
  return true;
}

/// Concatenates per-file batches and restores key order. Files are ordered
/// oldest first, so a later file wins on a duplicate key.
RecordBatch merge_files(std::vector<RecordBatch>& parts, Projection p) {
  RecordBatch all;
  std::vector<std::uint32_t> origin;
  for (std::uint32_t f = 0; f < parts.size(); ++f) {
    const auto& b = parts[f];
    all.element_id.insert(all.element_id.end(), b.element_id.begin(), b.element_id.end());
    all.ts.insert(all.ts.end(), b.ts.begin(), b.ts.end());
    all.value.insert(all.value.end(), b.value.begin(), b.value.end());
    all.status.insert(all.status.end(), b.status.begin(), b.status.end());
    all.status_valid.insert(all.status_valid.end(), b.status_valid.begin(), b.status_valid.end());
    origin.insert(origin.end(), b.size(), f);
  }
  std::vector<std::uint32_t> order(all.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (all.element_id[a] != all.element_id[b]) return all.element_id[a] < all.element_id[b];
    return all.ts[a] < all.ts[b];
  });
  std::vector<std::uint32_t> keep;
  keep.reserve(order.size());
  for (std::uint32_t i : order) {
    if (!keep.empty() && all.element_id[keep.back()] == all.element_id[i] && all.ts[keep.back()] == all.ts[i]) {
      keep.back() = i;  // stable order puts the newer file last
    } else {
      keep.push_back(i);
    }
  }
  RecordBatch out;
  gather(all, keep.data(), keep.size(), 0, p, out);
  return out;
}

PartitionResult scan_partition(const Table& table, const PartitionMeta& part, const ScanRequest& req) {
  PartitionResult result;
  std::vector<std::uint32_t> scratch;
  std::vector<RecordBatch> per_file;
  for (const auto& file : part.files) {
    ColumnFileReader reader(table.file_path(file));
    RecordBatch file_rows;
    for (std::size_t g = 0; g < reader.row_groups().size(); ++g) {
      if (!group_may_match(reader.row_groups()[g], req)) continue;
      RecordBatch decoded = reader.read_group(g, req.projection, req.value.has_value());
      result.rows_scanned += decoded.size();
      RecordBatch kept = filter_group(decoded, req, scratch);
      if (kept.empty()) continue;
      if (part.files.size() == 1) {
        result.batches.push_back(std::move(kept));
      } else {
        file_rows.element_id.insert(file_rows.element_id.end(), kept.element_id.begin(), kept.element_id.end());
        file_rows.ts.insert(file_rows.ts.end(), kept.ts.begin(), kept.ts.end());
        file_rows.value.insert(file_rows.value.end(), kept.value.begin(), kept.value.end());
        file_rows.status.insert(file_rows.status.end(), kept.status.begin(), kept.status.end());
        file_rows.status_valid.insert(file_rows.status_valid.end(), kept.status_valid.begin(), kept.status_valid.end());
      }
    }
    if (part.files.size() > 1) per_file.push_back(std::move(file_rows));
  }
  if (part.files.size() > 1) {
    RecordBatch merged = merge_files(per_file, req.projection);
    if (!merged.empty()) result.batches.push_back(std::move(merged));
  }
  return result;
}

}  // namespace

std::vector<PartitionMeta> prune_partitions(const Manifest& manifest, TimeRange range, const ValuePredicate* value,
                                            const ElementSet* elements) {
  std::vector<PartitionMeta> out;
  if (!range.valid()) return out;
  auto it = manifest.partitions.lower_bound(day_of(range.lo));
  for (; it != manifest.partitions.end() && day_start(it->first) < range.hi; ++it) {
    const PartitionMeta& p = it->second;
    if (p.row_count == 0) continue;
    if (!range.overlaps_closed(p.min_ts, p.max_ts)) continue;
    if (value && !value->may_match(p.min_value, p.max_value)) continue;
    if (elements && !p.element_ids.intersects(*elements)) continue;
    out.push_back(p);
  }
  return out;
}

ScanStats scan(const Table& table, const Manifest& manifest, const ScanRequest& request, const BatchSink& sink) {
  if (request.projection.empty()) throw ValidationError("scan projection must not be empty");
  if (!request.range.valid()) throw ValidationError("scan time range must satisfy lo < hi");
  ScanRequest req = request;
  if (req.elements) req.elements = make_element_set(std::move(*req.elements));

  ScanStats stats;
  stats.partitions_total = manifest.partitions.size();
  std::vector<PartitionMeta> parts =
      prune_partitions(manifest, req.range, req.value ? &*req.value : nullptr, req.elements ? &*req.elements : nullptr);
  stats.partitions_opened = parts.size();

  auto deliver = [&](PartitionResult& r) {
    stats.rows_scanned += r.rows_scanned;
    for (const auto& b : r.batches) {
      stats.rows_returned += b.size();
      sink(b);
    }
  };

  const std::size_t window = std::max(1u, req.parallelism);
  if (window == 1) {
    for (const auto& p : parts) {
      PartitionResult r = scan_partition(table, p, req);
      deliver(r);
    }
    return stats;
  }
  for (std::size_t start = 0; start < parts.size(); start += window) {
    std::vector<std::future<PartitionResult>> futures;
    std::size_t end = std::min(parts.size(), start + window);
    for (std::size_t i = start; i < end; ++i) {
      futures.push_back(std::async(std::launch::async, [&, i] { return scan_partition(table, parts[i], req); }));
    }
    for (auto& f : futures) {
      PartitionResult r = f.get();
      deliver(r);
    }
  }
  return stats;
}

std::pair<std::vector<EventRecord>, ScanStats> scan_records(const Table& table, const Manifest& manifest,
                                                            const ScanRequest& request) {
  std::vector<EventRecord> rows;
  ScanStats stats = scan(table, manifest, request, [&](const RecordBatch& b) {
    for (std::size_t i = 0; i < b.size(); ++i) rows.push_back(b.row(i));
  });
  return {std::move(rows), stats};
}

}  // namespace dcs::storage
