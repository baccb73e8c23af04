#include "dcs/analyses/hv_nominal.hpp"

#include <cmath>
#include <string>

#include "dcs/common/error.hpp"

namespace dcs::analyses {

DailyCounts hv_nominal_counts(const query::DailyExtremes& daily_max, double nominal, const query::IntervalSet& runs,
                              const ElementMapping* mapping) {
  if (!std::isfinite(nominal)) throw ValidationError("nominal must be finite");
  DailyCounts out;
  for (const auto& [key, vmax] : daily_max) {
    const auto& [id, day] = key;
    if (mapping) {
      const auto* info = mapping->find(id);
      if (!info || info->kind != ElementKind::hv_voltage)
        throw ValidationError("element " + std::to_string(id) + " is not an hv_voltage channel");
    }
    if (!runs.intersects(day_start(day), day_end(day))) continue;
    auto& c = out[day];
    if (vmax >= nominal)
      ++c.above;
    else
      ++c.below;
  }
  return out;
}

}  // namespace dcs::analyses
