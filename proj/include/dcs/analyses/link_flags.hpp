#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dcs/analyses/element_mapping.hpp"
#include "dcs/query/binning.hpp"
#include "dcs/query/interval_set.hpp"

namespace dcs::analyses {

enum class FlagRule { high_rssi, oscillating, stale };

std::string_view to_string(FlagRule rule);

struct FlagEvidence {
  std::uint64_t occurrence_count = 0;  ///< bins (or samples) above threshold
  double peak_value = 0.0;
  bool reached_hard_failure = false;
  std::uint64_t unstable_bins = 0;
  double max_std = 0.0;
  std::vector<query::Interval> stale_intervals;
};

struct LinkFlag {
  ElementId element_id = 0;
  FlagRule rule = FlagRule::high_rssi;
  FlagEvidence evidence;
  query::Interval window;  ///< first to last offending bin, or stale span
};

struct HighRssiParams {
  double threshold = 0.45;          ///< V, exceedance is strict
  std::uint64_t min_occurrences = 3;  ///< flag when count > this
  double hard_failure = 0.5;        ///< V, reported in evidence only
};

/// One occurrence per bin whose max exceeds the threshold. All elements in
/// `binned` must be mapped as rssi (ValidationError otherwise).
std::vector<LinkFlag> flag_high_rssi(const query::BinnedMap& binned, const ElementMapping& mapping,
                                     const HighRssiParams& params = {});

/// Variant counting individual samples above the threshold.
std::vector<LinkFlag> flag_high_rssi_samples(std::span<const EventRecord> records, const ElementMapping& mapping,
                                             const HighRssiParams& params = {});

enum class StdScope { per_bin, whole_window };

std::string_view to_string(StdScope scope);
StdScope parse_std_scope(std::string_view text);

struct OscillationParams {
  double std_threshold = 0.05;  ///< V, population std, strict
  std::uint64_t min_bins = 3;   ///< per_bin: flag when at least this many bins exceed
  StdScope scope = StdScope::per_bin;
};

/// per_bin: counts bins whose std exceeds the threshold. whole_window:
/// combines all bins of the element and compares the overall std; at least
/// min_bins bins with data are still required.
std::vector<LinkFlag> flag_oscillating(const query::BinnedMap& binned, const ElementMapping& mapping,
                                       const OscillationParams& params = {});

}  // namespace dcs::analyses
