#include "dcs/analyses/link_flags.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "dcs/common/error.hpp"

namespace dcs::analyses {

std::string_view to_string(FlagRule rule) {
  switch (rule) {
    case FlagRule::high_rssi: return "high_rssi";
    case FlagRule::oscillating: return "oscillating";
    case FlagRule::stale: return "stale";
  }
  return "unknown";
}

std::string_view to_string(StdScope scope) { return scope == StdScope::per_bin ? "per_bin" : "whole_window"; }

StdScope parse_std_scope(std::string_view text) {
  if (text == "per_bin" || text == "per-bin") return StdScope::per_bin;
  if (text == "whole_window" || text == "whole-window") return StdScope::whole_window;
  throw ValidationError("unknown std scope '" + std::string(text) + "'");
}

namespace {

void require_rssi(ElementId id, const ElementMapping& mapping) {
  const auto* info = mapping.find(id);
  if (!info) throw ValidationError("element " + std::to_string(id) + " is not in the mapping");
  if (info->kind != ElementKind::rssi)
    throw ValidationError("element " + std::to_string(id) + " is " + std::string(to_string(info->kind)) + ", not rssi");
}

void check(const HighRssiParams& p) {
  if (!(p.threshold > 0.0 && p.threshold <= 0.5)) throw ValidationError("threshold must be in (0, 0.5]");
  if (p.min_occurrences < 1) throw ValidationError("min_occurrences must be >= 1");
}

}  // namespace

std::vector<LinkFlag> flag_high_rssi(const query::BinnedMap& binned, const ElementMapping& mapping,
                                     const HighRssiParams& params) {
  check(params);
  std::vector<LinkFlag> out;
  for (const auto& [id, series] : binned) {
    require_rssi(id, mapping);
    LinkFlag f{id, FlagRule::high_rssi, {}, {}};
    bool any = false;
    for (const auto& b : series.bins) {
      if (!(b.max > params.threshold)) continue;
      ++f.evidence.occurrence_count;
      f.evidence.peak_value = any ? std::max(f.evidence.peak_value, b.max) : b.max;
      if (!any) f.window.start = b.bin_start;
      f.window.end = b.bin_start + series.bin_width;
      any = true;
    }
    if (f.evidence.occurrence_count > params.min_occurrences) {
      f.evidence.reached_hard_failure = f.evidence.peak_value >= params.hard_failure;
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<LinkFlag> flag_high_rssi_samples(std::span<const EventRecord> records, const ElementMapping& mapping,
                                             const HighRssiParams& params) {
  check(params);
  std::map<ElementId, LinkFlag> acc;
  for (const auto& r : records) {
    require_rssi(r.element_id, mapping);
    if (!(r.value > params.threshold)) continue;
    auto [it, fresh] = acc.try_emplace(r.element_id, LinkFlag{r.element_id, FlagRule::high_rssi, {}, {r.ts, r.ts}});
    auto& f = it->second;
    ++f.evidence.occurrence_count;
    f.evidence.peak_value = fresh ? r.value : std::max(f.evidence.peak_value, r.value);
    f.window.start = std::min(f.window.start, r.ts);
    f.window.end = std::max(f.window.end, r.ts + Duration{1});
  }
  std::vector<LinkFlag> out;
  for (auto& [id, f] : acc) {
    if (f.evidence.occurrence_count <= params.min_occurrences) continue;
    f.evidence.reached_hard_failure = f.evidence.peak_value >= params.hard_failure;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<LinkFlag> flag_oscillating(const query::BinnedMap& binned, const ElementMapping& mapping,
                                       const OscillationParams& params) {
  if (!(params.std_threshold > 0.0)) throw ValidationError("std_threshold must be > 0");
  if (params.min_bins < 1) throw ValidationError("min_bins must be >= 1");
  std::vector<LinkFlag> out;
  for (const auto& [id, series] : binned) {
    require_rssi(id, mapping);
    if (series.bins.empty()) continue;
    LinkFlag f{id, FlagRule::oscillating, {}, {}};
    if (params.scope == StdScope::per_bin) {
      bool any = false;
      for (const auto& b : series.bins) {
        if (!(b.std > params.std_threshold)) continue;
        ++f.evidence.unstable_bins;
        f.evidence.max_std = std::max(f.evidence.max_std, b.std);
        if (!any) f.window.start = b.bin_start;
        f.window.end = b.bin_start + series.bin_width;
        any = true;
      }
      if (f.evidence.unstable_bins >= params.min_bins) out.push_back(std::move(f));
    } else {
      if (series.bins.size() < params.min_bins) continue;
      double n = 0, mean = 0, m2 = 0;
      for (const auto& b : series.bins) {
        double nb = static_cast<double>(b.count);
        double delta = b.mean - mean;
        double total = n + nb;
        mean += delta * nb / total;
        m2 += b.std * b.std * nb + delta * delta * n * nb / total;
        n = total;
      }
      double sd = n > 0 ? std::sqrt(m2 / n) : 0.0;
      if (sd > params.std_threshold) {
        f.evidence.max_std = sd;
        f.evidence.unstable_bins = series.bins.size();
        f.window = {series.bins.front().bin_start, series.bins.back().bin_start + series.bin_width};
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

}  // namespace dcs::analyses
