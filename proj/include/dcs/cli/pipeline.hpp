#pragma once

// End-to-end analysis runs over a stored table, shared by dcsctl and tests.

#include <optional>
#include <vector>

#include "dcs/analyses/geometry.hpp"
#include "dcs/analyses/hv_nominal.hpp"
#include "dcs/analyses/link_flags.hpp"
#include "dcs/analyses/stale.hpp"
#include "dcs/storage/scan.hpp"

namespace dcs::cli {

struct AnalysisScope {
  TimeRange range;
  std::optional<ElementSet> elements;  ///< defaults to the mapping's elements of the right kind
  const query::IntervalSet* drop_mask = nullptr;
  unsigned parallelism = 1;
};

struct FlagRun {
  std::vector<analyses::LinkFlag> flags;
  storage::ScanStats stats;
  double scan_seconds = 0.0;  ///< scan + binning
};

struct HighRssiOptions {
  analyses::HighRssiParams params;
  Duration bin = std::chrono::days{1};
  bool count_samples = false;
  bool pushdown = true;  ///< push `value > threshold` into the scan
};

FlagRun failed_links(const storage::Table& table, const storage::Manifest& manifest, const AnalysisScope& scope,
                     const analyses::ElementMapping& mapping, const HighRssiOptions& options = {});

struct OscillationOptions {
  analyses::OscillationParams params;
  Duration bin = std::chrono::days{1};
};

FlagRun oscillating_links(const storage::Table& table, const storage::Manifest& manifest, const AnalysisScope& scope,
                          const analyses::ElementMapping& mapping, const OscillationOptions& options = {});

/// Elements default to the mapping's rssi elements when a mapping is given,
/// otherwise every element seen in the range. drop_mask is the stale mask.
FlagRun stale_links(const storage::Table& table, const storage::Manifest& manifest, const AnalysisScope& scope,
                    const analyses::ElementMapping* mapping, Duration staleness = std::chrono::hours{24});

struct HvRun {
  analyses::DailyCounts counts;
  storage::ScanStats stats;
};

HvRun hv_nominal(const storage::Table& table, const storage::Manifest& manifest, const AnalysisScope& scope,
                 const analyses::ElementMapping* mapping, double nominal, const query::IntervalSet& runs);

/// Parses "1,2,10-20" into a sorted set. Throws ValidationError.
ElementSet parse_element_list(std::string_view text);

}  // namespace dcs::cli
