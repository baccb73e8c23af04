#include "dcs/analyses/stale.hpp"

#include <algorithm>
#include <set>

#include "dcs/common/error.hpp"

namespace dcs::analyses {

std::vector<LinkFlag> detect_stale(const query::LastUpdateIndex& last_update, const query::GapIndex& gaps,
                                   TimeRange range, Duration staleness, const query::IntervalSet& masks) {
  if (!range.valid()) throw ValidationError("invalid time range");
  if (staleness <= Duration::zero()) throw ValidationError("staleness must be > 0");
  std::set<ElementId> ids;
  for (const auto& [id, _] : last_update) ids.insert(id);
  for (const auto& [id, _] : gaps) ids.insert(id);

  std::vector<LinkFlag> out;
  for (ElementId id : ids) {
    std::vector<query::Interval> silent;
    if (auto g = gaps.find(id); g != gaps.end()) silent = g->second;
    if (auto lu = last_update.find(id); lu != last_update.end() && lu->second < range.hi)
      silent.push_back({std::max(lu->second, range.lo), range.hi});
    std::vector<query::Interval> pieces;
    // Pieces are kept separately: a mask splitting a silence shortens it.
    for (const auto& s : silent) {
      auto kept = query::IntervalSet({s}).subtract(masks);
      for (const auto& p : kept.intervals())
        if (p.length() > staleness) pieces.push_back(p);
    }
    if (pieces.empty()) continue;
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    LinkFlag f{id, FlagRule::stale, {}, {pieces.front().start, pieces.back().end}};
    f.evidence.occurrence_count = pieces.size();
    f.evidence.stale_intervals = std::move(pieces);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace dcs::analyses
