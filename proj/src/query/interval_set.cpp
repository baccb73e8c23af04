#include "dcs/query/interval_set.hpp"

#include <algorithm>
#include <fstream>

#include "dcs/common/error.hpp"
#include "dcs/common/file_util.hpp"

namespace dcs::query {

IntervalSet::IntervalSet(std::vector<Interval> intervals, std::string label) : label_(std::move(label)) {
  std::erase_if(intervals, [](const Interval& i) { return !(i.start < i.end); });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start || (a.start == b.start && a.end < b.end); });
  for (const auto& i : intervals) {
    if (!intervals_.empty() && i.start <= intervals_.back().end) {
      intervals_.back().end = std::max(intervals_.back().end, i.end);
    } else {
      intervals_.push_back(i);
    }
  }
}

IntervalSet IntervalSet::from_runs(std::span<const sources::RunInterval> runs, std::span<const sources::RunKind> kinds,
                                   std::string label) {
  std::vector<Interval> out;
  for (const auto& r : runs) {
    if (!kinds.empty() && std::find(kinds.begin(), kinds.end(), r.kind) == kinds.end()) continue;
    out.push_back({r.start_ts, r.end_ts});
  }
  return IntervalSet(std::move(out), std::move(label));
}

IntervalSet IntervalSet::parse(std::string_view text, std::string label) {
  std::vector<Interval> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError("expected start<TAB>end", line_no);
    auto tab2 = line.find('\t', tab + 1);
    try {
      Interval i{parse_iso(line.substr(0, tab)), parse_iso(line.substr(tab + 1, tab2 == std::string_view::npos ? std::string_view::npos : tab2 - tab - 1))};
      if (!(i.start < i.end)) throw ParseError("interval start must precede end", line_no);
      out.push_back(i);
    } catch (const ParseError& e) {
      if (e.line()) throw;
      throw ParseError(e.what(), line_no);
    }
  }
  return IntervalSet(std::move(out), std::move(label));
}

IntervalSet IntervalSet::load(const std::filesystem::path& file, std::string label) {
  return parse(read_file_text(file), std::move(label));
}

void IntervalSet::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  for (const auto& i : intervals_) out << format_iso(i.start) << '\t' << format_iso(i.end) << '\n';
}

bool IntervalSet::contains(Timestamp t) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                             [](Timestamp v, const Interval& i) { return v < i.start; });
  if (it == intervals_.begin()) return false;
  return t < std::prev(it)->end;
}

bool IntervalSet::intersects(Timestamp start, Timestamp end) const {
  if (!(start < end)) return false;
  // First interval ending after `start`.
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), start,
                             [](Timestamp v, const Interval& i) { return v < i.end; });
  return it != intervals_.end() && it->start < end;
}

IntervalSet IntervalSet::subtract(const IntervalSet& other) const {
  std::vector<Interval> out;
  auto cut = other.intervals_.begin();
  for (Interval piece : intervals_) {
    while (cut != other.intervals_.end() && cut->end <= piece.start) ++cut;
    for (auto c = cut; c != other.intervals_.end() && c->start < piece.end; ++c) {
      if (c->start > piece.start) out.push_back({piece.start, c->start});
      piece.start = std::max(piece.start, c->end);
      if (!(piece.start < piece.end)) break;
    }
    if (piece.start < piece.end) out.push_back(piece);
  }
  return IntervalSet(std::move(out), label_);
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return IntervalSet(std::move(all), label_);
}

Duration IntervalSet::total() const {
  Duration d{0};
  for (const auto& i : intervals_) d += i.length();
  return d;
}

}  // namespace dcs::query
