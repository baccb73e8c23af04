#pragma once

#include <vector>

#include "dcs/analyses/link_flags.hpp"
#include "dcs/query/last_update.hpp"

namespace dcs::analyses {

/// Flags elements silent for longer than `staleness` inside `range`, after
/// removing masked time. Silent periods are the gaps plus the tail from
/// the last update to range.hi. Elements present only in `gaps` with no
/// last update (never reported) are silent over the whole range.
std::vector<LinkFlag> detect_stale(const query::LastUpdateIndex& last_update, const query::GapIndex& gaps,
                                   TimeRange range, Duration staleness = std::chrono::hours(24),
                                   const query::IntervalSet& masks = {});

}  // namespace dcs::analyses
