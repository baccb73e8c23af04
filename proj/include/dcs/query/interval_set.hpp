#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcs/common/time.hpp"
#include "dcs/sources/run_intervals.hpp"

namespace dcs::query {

/// Half-open [start, end).
struct Interval {
  Timestamp start{};
  Timestamp end{};

  Duration length() const { return end - start; }
  bool contains(Timestamp t) const { return start <= t && t < end; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, disjoint, non-adjacent half-open intervals.
class IntervalSet {
 public:
  IntervalSet() = default;
  /// Normalises: drops empty intervals, sorts, merges overlapping or touching ones.
  explicit IntervalSet(std::vector<Interval> intervals, std::string label = {});

  /// Union of the given runs, optionally restricted to some kinds.
  static IntervalSet from_runs(std::span<const sources::RunInterval> runs,
                               std::span<const sources::RunKind> kinds = {}, std::string label = "runs");

  /// Mask file: `start_iso <TAB> end_iso [<TAB> comment]` per line, '#' comments.
  static IntervalSet load(const std::filesystem::path& file, std::string label = "mask");
  static IntervalSet parse(std::string_view text, std::string label = "mask");
  void save(const std::filesystem::path& file) const;

  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::string& label() const { return label_; }
  bool empty() const { return intervals_.empty(); }

  bool contains(Timestamp t) const;
  /// True if [start, end) shares a point with the set.
  bool intersects(Timestamp start, Timestamp end) const;

  IntervalSet subtract(const IntervalSet& other) const;
  IntervalSet unite(const IntervalSet& other) const;
  Duration total() const;

  friend bool operator==(const IntervalSet& a, const IntervalSet& b) { return a.intervals_ == b.intervals_; }

 private:
  std::vector<Interval> intervals_;
  std::string label_;
};

}  // namespace dcs::query
