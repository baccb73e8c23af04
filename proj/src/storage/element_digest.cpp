#include "dcs/storage/element_digest.hpp"

#include <algorithm>

namespace dcs::storage {

ElementDigest ElementDigest::from_sorted(std::span<const ElementId> ids) {
  ElementDigest d;
  for (ElementId id : ids) {
    if (!d.ranges_.empty()) {
      auto& back = d.ranges_.back();
      if (id <= back.second) continue;
      if (id == back.second + 1) {
        back.second = id;
        continue;
      }
    }
    d.ranges_.emplace_back(id, id);
  }
  return d;
}

ElementDigest ElementDigest::from_ranges(std::vector<Range> ranges) {
  std::sort(ranges.begin(), ranges.end());
  ElementDigest d;
  for (auto [lo, hi] : ranges) {
    if (lo > hi) std::swap(lo, hi);
    if (!d.ranges_.empty() && static_cast<std::uint64_t>(lo) <= static_cast<std::uint64_t>(d.ranges_.back().second) + 1) {
      d.ranges_.back().second = std::max(d.ranges_.back().second, hi);
    } else {
      d.ranges_.emplace_back(lo, hi);
    }
  }
  return d;
}

bool ElementDigest::contains(ElementId id) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), id,
                             [](ElementId v, const Range& r) { return v < r.first; });
  if (it == ranges_.begin()) return false;
  --it;
  return id <= it->second;
}

bool ElementDigest::intersects(const ElementSet& ids) const {
  // Merge-walk both sorted sequences.
  auto r = ranges_.begin();
  auto i = ids.begin();
  while (r != ranges_.end() && i != ids.end()) {
    if (*i < r->first) {
      i = std::lower_bound(i, ids.end(), r->first);
    } else if (*i > r->second) {
      ++r;
    } else {
      return true;
    }
  }
  return false;
}

std::size_t ElementDigest::cardinality() const {
  std::size_t n = 0;
  for (auto [lo, hi] : ranges_) n += static_cast<std::size_t>(hi - lo) + 1;
  return n;
}

std::vector<ElementId> ElementDigest::expand() const {
  std::vector<ElementId> out;
  out.reserve(cardinality());
  for (auto [lo, hi] : ranges_) {
    for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(static_cast<ElementId>(v));
  }
  return out;
}

ElementDigest ElementDigest::merged(const ElementDigest& other) const {
  std::vector<Range> all = ranges_;
  all.insert(all.end(), other.ranges_.begin(), other.ranges_.end());
  return from_ranges(std::move(all));
}

}  // namespace dcs::storage
