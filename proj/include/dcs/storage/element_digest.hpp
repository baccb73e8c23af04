#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dcs/common/record.hpp"

namespace dcs::storage {

/// Exact membership summary of the element ids present in a partition,
/// stored as sorted, non-adjacent closed ranges [first, last].
class ElementDigest {
 public:
  using Range = std::pair<ElementId, ElementId>;

  ElementDigest() = default;

  /// `ids` must be sorted ascending; duplicates are allowed.
  static ElementDigest from_sorted(std::span<const ElementId> ids);
  static ElementDigest from_ranges(std::vector<Range> ranges);

  bool empty() const { return ranges_.empty(); }
  bool contains(ElementId id) const;
  /// True if any id of the sorted set is a member.
  bool intersects(const ElementSet& ids) const;
  std::size_t cardinality() const;
  std::vector<ElementId> expand() const;

  ElementDigest merged(const ElementDigest& other) const;

  const std::vector<Range>& ranges() const { return ranges_; }

  friend bool operator==(const ElementDigest&, const ElementDigest&) = default;

 private:
  std::vector<Range> ranges_;
};

}  // namespace dcs::storage
