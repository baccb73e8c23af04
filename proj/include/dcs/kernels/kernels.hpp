#pragma once

// Data-parallel inner loops used by the scan and aggregation paths.
//
// Every kernel has a portable scalar reference implementation and, where the
// target supports it, a vectorised variant. The variant is picked once at
// runtime from the CPU features; DCS_KERNELS=scalar in the environment forces
// the reference path. All variants must produce identical selections and
// extrema, and sums equal up to floating-point reassociation.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace dcs::kernels {

/// Closed or open bounds on a value; infinite bounds mean "unbounded".
struct ValueBounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  bool hi_open = false;

  bool matches(double v) const {
    return (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  }
};

struct Extrema {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
};

struct KernelTable {
  std::string_view name;

  /// Writes indices i (relative to the spans) with ts_lo <= ts[i] < ts_hi to
  /// `out`, which must hold ts.size() entries. Returns the number written.
  std::size_t (*select_time)(std::span<const std::int64_t> ts, std::int64_t ts_lo, std::int64_t ts_hi,
                             std::uint32_t* out);

  /// As select_time, additionally requiring bounds.matches(values[i]).
  std::size_t (*select_time_value)(std::span<const std::int64_t> ts, std::span<const double> values,
                                   std::int64_t ts_lo, std::int64_t ts_hi, const ValueBounds& bounds,
                                   std::uint32_t* out);

  Extrema (*extrema)(std::span<const double> values);

  /// Sum of (v - mean)^2.
  double (*sum_sq_dev)(std::span<const double> values, double mean);

  /// Number of values strictly greater than `threshold`.
  std::size_t (*count_above)(std::span<const double> values, double threshold);
};

const KernelTable& scalar_kernels();

/// nullptr when the build has no AVX2 variant or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// The table chosen for this process.
const KernelTable& active();

/// Override the dispatch choice ("scalar" or "avx2"); returns false if the
/// requested variant is unavailable. Intended for tests and benchmarks.
bool force_variant(std::string_view name);

}  // namespace dcs::kernels
