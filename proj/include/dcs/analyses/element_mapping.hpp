#pragma once

// Mapping file: one element per line, tab separated
//
//   element_id <TAB> detector <TAB> wheel <TAB> sector <TAB> layer <TAB> board <TAB> kind
//
// wheel is 1..2, sector 1..16, layer 1..8, kind one of rssi, hv_voltage,
// hv_current, other. '#' starts a comment line.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "dcs/common/record.hpp"

namespace dcs::analyses {

enum class ElementKind { rssi, hv_voltage, hv_current, other };

std::string_view to_string(ElementKind kind);
ElementKind parse_element_kind(std::string_view text);

struct ElementInfo {
  std::string detector;
  int wheel = 1;
  int sector = 1;
  int layer = 1;
  std::string board;
  ElementKind kind = ElementKind::other;

  friend bool operator==(const ElementInfo&, const ElementInfo&) = default;
};

inline constexpr int kWheels = 2;
inline constexpr int kSectorsPerWheel = 16;
inline constexpr int kLayers = 8;

class ElementMapping {
 public:
  /// Throws ValidationError on out-of-range geometry or a duplicate id.
  void add(ElementId id, ElementInfo info);

  const ElementInfo* find(ElementId id) const;
  ElementSet elements_of_kind(ElementKind kind) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<ElementId, ElementInfo>& entries() const { return entries_; }

  static ElementMapping parse(std::string_view text);
  static ElementMapping load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

 private:
  std::map<ElementId, ElementInfo> entries_;
};

}  // namespace dcs::analyses
