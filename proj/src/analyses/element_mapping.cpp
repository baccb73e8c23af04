#include "dcs/analyses/element_mapping.hpp"

#include <charconv>
#include <fstream>
#include <vector>

#include "dcs/common/error.hpp"
#include "dcs/common/file_util.hpp"

namespace dcs::analyses {

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::rssi: return "rssi";
    case ElementKind::hv_voltage: return "hv_voltage";
    case ElementKind::hv_current: return "hv_current";
    case ElementKind::other: return "other";
  }
  return "other";
}

ElementKind parse_element_kind(std::string_view text) {
  if (text == "rssi") return ElementKind::rssi;
  if (text == "hv_voltage") return ElementKind::hv_voltage;
  if (text == "hv_current") return ElementKind::hv_current;
  if (text == "other") return ElementKind::other;
  throw ParseError("unknown element kind '" + std::string(text) + "'");
}

void ElementMapping::add(ElementId id, ElementInfo info) {
  if (info.wheel < 1 || info.wheel > kWheels) throw ValidationError("element " + std::to_string(id) + ": wheel out of range");
  if (info.sector < 1 || info.sector > kSectorsPerWheel)
    throw ValidationError("element " + std::to_string(id) + ": sector out of range");
  if (info.layer < 1 || info.layer > kLayers) throw ValidationError("element " + std::to_string(id) + ": layer out of range");
  if (!entries_.emplace(id, std::move(info)).second)
    throw ValidationError("element " + std::to_string(id) + " mapped twice");
}

const ElementInfo* ElementMapping::find(ElementId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

ElementSet ElementMapping::elements_of_kind(ElementKind kind) const {
  ElementSet out;
  for (const auto& [id, info] : entries_)
    if (info.kind == kind) out.push_back(id);
  return out;
}

ElementMapping ElementMapping::parse(std::string_view text) {
  ElementMapping m;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> f;
    while (true) {
      auto tab = line.find('\t');
      f.push_back(line.substr(0, tab));
      if (tab == std::string_view::npos) break;
      line.remove_prefix(tab + 1);
    }
    if (f.size() != 7) throw ParseError("expected 7 tab-separated fields", line_no);
    auto num = [&](std::string_view s, const char* what) {
      long v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ParseError(std::string("bad ") + what + " '" + std::string(s) + "'", line_no);
      return v;
    };
    ElementInfo info;
    info.detector = std::string(f[1]);
    info.wheel = static_cast<int>(num(f[2], "wheel"));
    info.sector = static_cast<int>(num(f[3], "sector"));
    info.layer = static_cast<int>(num(f[4], "layer"));
    info.board = std::string(f[5]);
    try {
      info.kind = parse_element_kind(f[6]);
      m.add(static_cast<ElementId>(num(f[0], "element_id")), std::move(info));
    } catch (const ParseError& e) {
      if (e.line()) throw;
      throw ParseError(e.what(), line_no);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return m;
}

ElementMapping ElementMapping::load(const std::filesystem::path& file) { return parse(read_file_text(file)); }

void ElementMapping::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << "# element_id\tdetector\twheel\tsector\tlayer\tboard\tkind\n";
  for (const auto& [id, i] : entries_) {
    out << id << '\t' << i.detector << '\t' << i.wheel << '\t' << i.sector << '\t' << i.layer << '\t' << i.board << '\t'
        << to_string(i.kind) << '\n';
  }
}

}  // namespace dcs::analyses
