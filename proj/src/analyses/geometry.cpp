#include "dcs/analyses/geometry.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace dcs::analyses {

namespace {

std::string describe(const std::vector<ElementId>& ids) {
  std::string s = "unmapped elements:";
  for (auto id : ids) s += " " + std::to_string(id);
  return s;
}

}  // namespace

UnmappedElementsError::UnmappedElementsError(std::vector<ElementId> ids)
    : ValidationError(describe(ids)), ids_(std::move(ids)) {}

std::uint64_t GeometryGrid::total() const {
  std::uint64_t n = 0;
  for (const auto& row : cells)
    for (auto c : row) n += c;
  return n;
}

GeometryGrid geometry_grid(std::span<const LinkFlag> flags, const ElementMapping& mapping, int wheel) {
  if (wheel < 1 || wheel > kWheels) throw ValidationError("wheel must be 1 or 2");
  std::set<ElementId> distinct;
  std::vector<ElementId> missing;
  for (const auto& f : flags) {
    if (!mapping.find(f.element_id))
      missing.push_back(f.element_id);
    else
      distinct.insert(f.element_id);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    throw UnmappedElementsError(std::move(missing));
  }
  GeometryGrid g;
  g.wheel = wheel;
  for (auto id : distinct) {
    const auto* info = mapping.find(id);
    if (info->wheel == wheel) ++g.cells[info->layer - 1][info->sector - 1];
  }
  return g;
}

}  // namespace dcs::analyses
