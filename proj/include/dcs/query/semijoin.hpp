#pragma once

#include <span>
#include <vector>

#include "dcs/common/record.hpp"
#include "dcs/query/binning.hpp"
#include "dcs/query/interval_set.hpp"

namespace dcs::query {

enum class JoinMode { keep, drop };

/// `keep` retains rows whose ts lies in some interval, `drop` the rest.
/// Input order is preserved.
std::vector<EventRecord> interval_semijoin(std::span<const EventRecord> records, const IntervalSet& intervals,
                                           JoinMode mode);

/// Same on bins, keyed by bin_start. Elements left without bins are removed.
BinnedMap interval_semijoin(const BinnedMap& binned, const IntervalSet& intervals, JoinMode mode);

}  // namespace dcs::query
