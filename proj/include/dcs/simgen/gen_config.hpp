#pragma once

// Generator configuration, INI style. All keys are optional.
//
//   [generator]
//   seed = 7
//   start = 2024-01-01
//   days = 365
//   rssi_elements = 512
//   hv_channels = 64
//   cadence = 25m
//   jitter = 60s
//   heartbeat = 6h
//   deadband = 0
//   shutdown_days = 14          ; or shutdown_start / shutdown_end (ISO)
//   no_run_fraction = 0.05
//   random_stuck_high = 0
//   random_oscillating = 0
//   random_disabled = 0
//   random_hv_off = 0
//
//   [fault.1]
//   element = 17
//   kind = stuck_high           ; stuck_high | oscillating | disabled_interval | hv_off_interval
//   start = 2024-03-01
//   end = 2024-03-10
//   recovery_level = 0.08       ; optional, rssi level after the window
//
// For hv_off_interval, element = 0 switches off every hv channel.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "dcs/common/record.hpp"

namespace dcs::simgen {

enum class FaultKind { stuck_high, oscillating, disabled_interval, hv_off_interval };

std::string_view to_string(FaultKind kind);
FaultKind parse_fault_kind(std::string_view text);

struct FaultSpec {
  ElementId element = 0;
  FaultKind kind = FaultKind::stuck_high;
  TimeRange window;
  std::optional<double> recovery_level;
};

struct GenConfig {
  std::uint64_t seed = 1;
  Day start = Day{std::chrono::year{2024} / 1 / 1};
  int days = 365;

  int rssi_elements = 512;
  ElementId rssi_first_id = 1;
  int hv_channels = 64;
  ElementId hv_first_id = 2001;

  Duration cadence = std::chrono::minutes{25};
  Duration jitter = std::chrono::seconds{60};  ///< uniform in [-jitter, +jitter]
  Duration heartbeat = std::chrono::hours{6};
  double deadband = 0.0;  ///< V; 0 emits every sample

  double rssi_baseline_lo = 0.15;
  double rssi_baseline_hi = 0.30;
  double rssi_noise = 0.003;
  double hv_nominal = 505.0;
  double hv_noise = 0.15;

  std::optional<TimeRange> shutdown;  ///< defaults to the last 14 days
  double no_run_fraction = 0.05;
  std::int64_t first_run = 470000;

  std::vector<FaultSpec> faults;
  int random_stuck_high = 0;
  int random_oscillating = 0;
  int random_disabled = 0;
  int random_hv_off = 0;

  TimeRange span() const { return {day_start(start), day_start(start + std::chrono::days{days})}; }
  ElementId rssi_id(int i) const { return rssi_first_id + static_cast<ElementId>(i); }
  ElementId hv_id(int i) const { return hv_first_id + static_cast<ElementId>(i); }
  bool is_rssi(ElementId id) const { return id >= rssi_first_id && id < rssi_first_id + ElementId(rssi_elements); }
  bool is_hv(ElementId id) const { return id >= hv_first_id && id < hv_first_id + ElementId(hv_channels); }

  /// Throws ValidationError on inconsistent settings.
  void validate() const;

  static constexpr int kMaxRssi = 512;

  static GenConfig parse(std::istream& in);
  static GenConfig load(const std::filesystem::path& file);
};

/// Shutdown of `days` whole days at the end of the span.
TimeRange tail_shutdown(const GenConfig& cfg, int days);

/// Appends the random_* fault counts as explicit FaultSpecs, deterministic
/// in cfg.seed. Windows are whole days, outside the shutdown, and each
/// rssi element receives at most one fault. Resets the random_* counts.
void expand_random_faults(GenConfig& cfg);

}  // namespace dcs::simgen
