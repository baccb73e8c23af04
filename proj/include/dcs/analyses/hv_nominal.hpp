#pragma once

#include <cstdint>
#include <map>

#include "dcs/analyses/element_mapping.hpp"
#include "dcs/query/extremes.hpp"
#include "dcs/query/interval_set.hpp"

namespace dcs::analyses {

struct DayCount {
  std::uint32_t above = 0;  ///< channels with daily max >= nominal
  std::uint32_t below = 0;

  friend bool operator==(const DayCount&, const DayCount&) = default;
};

using DailyCounts = std::map<Day, DayCount>;

/// Counts channels at or above `nominal` per day, over days that overlap a
/// run interval. With a mapping, every channel must be hv_voltage.
DailyCounts hv_nominal_counts(const query::DailyExtremes& daily_max, double nominal, const query::IntervalSet& runs,
                              const ElementMapping* mapping = nullptr);

}  // namespace dcs::analyses
