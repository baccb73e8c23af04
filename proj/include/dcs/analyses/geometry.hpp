#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dcs/analyses/element_mapping.hpp"
#include "dcs/analyses/link_flags.hpp"
#include "dcs/common/error.hpp"

namespace dcs::analyses {

/// Distinct flagged elements per (layer, sector) of one wheel.
struct GeometryGrid {
  int wheel = 1;
  std::array<std::array<std::uint32_t, kSectorsPerWheel>, kLayers> cells{};  ///< [layer-1][sector-1]

  std::uint32_t at(int layer, int sector) const { return cells[layer - 1][sector - 1]; }
  std::uint64_t total() const;
};

class UnmappedElementsError : public ValidationError {
 public:
  explicit UnmappedElementsError(std::vector<ElementId> ids);
  const std::vector<ElementId>& ids() const { return ids_; }

 private:
  std::vector<ElementId> ids_;
};

/// Throws UnmappedElementsError naming every flagged element missing from
/// the mapping. Flags on other wheels are ignored.
GeometryGrid geometry_grid(std::span<const LinkFlag> flags, const ElementMapping& mapping, int wheel);

}  // namespace dcs::analyses
