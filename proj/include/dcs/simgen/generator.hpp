#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcs/analyses/element_mapping.hpp"
#include "dcs/query/interval_set.hpp"
#include "dcs/simgen/gen_config.hpp"
#include "dcs/sources/run_intervals.hpp"

namespace dcs::simgen {

struct TruthEntry {
  ElementId element = 0;  ///< 0 for sector-wide hv_off
  FaultKind fault = FaultKind::stuck_high;
  TimeRange window;
  std::string expected_flag;  ///< high_rssi, oscillating, stale, hv_below_nominal

  friend bool operator==(const TruthEntry&, const TruthEntry&) = default;
};

std::string expected_flag_for(FaultKind kind);

struct GeneratedDataset {
  std::vector<EventRecord> events;  ///< ordered by (ts, element_id)
  std::vector<sources::RunInterval> runs;
  query::IntervalSet shutdown_mask;
  analyses::ElementMapping mapping;
  std::vector<TruthEntry> truth;
};

/// Receives one UTC day of events ordered by (ts, element_id).
using DaySink = std::function<void(Day, std::span<const EventRecord>)>;

/// Streams events day by day. Output depends only on the config.
void generate_events(const GenConfig& config, const DaySink& sink);

std::vector<sources::RunInterval> generate_runs(const GenConfig& config);
analyses::ElementMapping generate_mapping(const GenConfig& config);
std::vector<TruthEntry> ground_truth(const GenConfig& config);
query::IntervalSet shutdown_mask(const GenConfig& config);

GeneratedDataset generate(const GenConfig& config);

/// Writes events.tsv, truth.json, runs.tsv, mask.tsv, mapping.tsv and a
/// sync.ini that ingests events.tsv into table `eventhistory` under store/.
/// Events are streamed, the full dataset is never held in memory.
void write_outputs(const GenConfig& config, const std::filesystem::path& dir);

std::string truth_to_json(std::span<const TruthEntry> truth);
std::vector<TruthEntry> truth_from_json(std::string_view text);

}  // namespace dcs::simgen
