#include "dcs/simgen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "dcs/common/error.hpp"
#include "dcs/common/file_util.hpp"
#include "dcs/sources/fixture_source.hpp"

namespace dcs::simgen {

using namespace std::chrono_literals;

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return std::mt19937_64(mix(mix(mix(seed) ^ a) ^ b));
}

constexpr std::uint64_t kBaselineTag = 0xba5e;
constexpr std::uint64_t kRunTag = 0x7275;

struct ElementState {
  ElementId id = 0;
  bool rssi = true;
  double baseline = 0.0;
  std::int64_t phase_us = 0;
  std::vector<const FaultSpec*> faults;
  bool emitted = false;
  double last_value = 0.0;
  Timestamp last_ts{};
  std::uint64_t sample_index = 0;
};

std::vector<ElementState> make_states(const GenConfig& cfg) {
  std::vector<ElementState> states;
  auto cad = cfg.cadence.count();
  auto add = [&](ElementId id, bool rssi) {
    auto rng = stream(cfg.seed, kBaselineTag, id);
    ElementState s;
    s.id = id;
    s.rssi = rssi;
    s.baseline = std::uniform_real_distribution<double>(cfg.rssi_baseline_lo, cfg.rssi_baseline_hi)(rng);
    s.phase_us = std::uniform_int_distribution<std::int64_t>(0, cad - 1)(rng);
    for (const auto& f : cfg.faults) {
      bool hits = f.element == id || (f.kind == FaultKind::hv_off_interval && f.element == 0 && !rssi);
      if (hits) s.faults.push_back(&f);
    }
    states.push_back(std::move(s));
  };
  for (int i = 0; i < cfg.rssi_elements; ++i) add(cfg.rssi_id(i), true);
  for (int i = 0; i < cfg.hv_channels; ++i) add(cfg.hv_id(i), false);
  return states;
}

struct Sample {
  bool emit = true;
  double value = 0.0;
};

Sample rssi_value(const GenConfig& cfg, ElementState& s, Timestamp t, std::mt19937_64& rng) {
  double level = s.baseline;
  for (const auto* f : s.faults) {
    if (f->window.contains(t)) {
      switch (f->kind) {
        case FaultKind::stuck_high: {
          // (0.455, 0.5]
          double u = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
          return {true, 0.455 + 0.045 * u};
        }
        case FaultKind::oscillating:
          return {true, (s.sample_index % 2 == 0 ? 0.10 : 0.40) + std::normal_distribution<double>(0, cfg.rssi_noise)(rng)};
        case FaultKind::disabled_interval: return {false, 0.0};
        case FaultKind::hv_off_interval: break;
      }
    } else if (f->recovery_level && t >= f->window.hi) {
      level = *f->recovery_level;
    }
  }
  double v = level + std::normal_distribution<double>(0.0, cfg.rssi_noise)(rng);
  return {true, std::clamp(v, 0.0, 0.44)};
}

Sample hv_value(const GenConfig& cfg, const ElementState& s, Timestamp t, std::mt19937_64& rng) {
  bool off = cfg.shutdown && cfg.shutdown->contains(t);
  for (const auto* f : s.faults)
    if (f->window.contains(t)) off = true;
  if (off) return {true, std::abs(std::normal_distribution<double>(0.0, 0.2)(rng))};
  return {true, cfg.hv_nominal + std::abs(std::normal_distribution<double>(0.0, cfg.hv_noise)(rng))};
}

}  // namespace

std::string expected_flag_for(FaultKind kind) {
  switch (kind) {
    case FaultKind::stuck_high: return "high_rssi";
    case FaultKind::oscillating: return "oscillating";
    case FaultKind::disabled_interval: return "stale";
    case FaultKind::hv_off_interval: return "hv_below_nominal";
  }
  return "";
}

void generate_events(const GenConfig& cfg, const DaySink& sink) {
  cfg.validate();
  auto states = make_states(cfg);
  const auto cad = cfg.cadence.count();
  const auto jit = cfg.jitter.count();
  const auto origin = cfg.span().lo.time_since_epoch().count();
  std::vector<EventRecord> day_rows;
  for (int d = 0; d < cfg.days; ++d) {
    Day day = cfg.start + std::chrono::days{d};
    const auto lo = day_start(day).time_since_epoch().count();
    const auto hi = day_end(day).time_since_epoch().count();
    day_rows.clear();
    for (auto& s : states) {
      auto rng = stream(cfg.seed, s.id, static_cast<std::uint64_t>(d));
      // Nominal sample k sits at origin + phase + k * cadence; it belongs
      // to the day holding its nominal time and jitter is clamped to it.
      std::int64_t first = lo - origin - s.phase_us;
      std::int64_t k = first <= 0 ? 0 : (first + cad - 1) / cad;
      for (;; ++k) {
        std::int64_t nominal = origin + s.phase_us + k * cad;
        if (nominal >= hi) break;
        std::int64_t t_us = nominal;
        if (jit > 0) t_us += std::uniform_int_distribution<std::int64_t>(-jit, jit)(rng);
        t_us = std::clamp(t_us, lo, hi - 1);
        Timestamp t = from_micros(t_us);
        s.sample_index = static_cast<std::uint64_t>(k);
        Sample smp;
        if (s.rssi) {
          if (cfg.shutdown && cfg.shutdown->contains(t)) continue;
          smp = rssi_value(cfg, s, t, rng);
        } else {
          smp = hv_value(cfg, s, t, rng);
        }
        if (!smp.emit) continue;
        bool due = !s.emitted || std::abs(smp.value - s.last_value) > cfg.deadband || t - s.last_ts >= cfg.heartbeat;
        if (!due) continue;
        s.emitted = true;
        s.last_value = smp.value;
        s.last_ts = t;
        day_rows.push_back({s.id, t, smp.value, std::nullopt});
      }
    }
    std::sort(day_rows.begin(), day_rows.end(),
              [](const auto& a, const auto& b) { return std::tie(a.ts, a.element_id) < std::tie(b.ts, b.element_id); });
    sink(day, day_rows);
  }
}

std::vector<sources::RunInterval> generate_runs(const GenConfig& cfg) {
  cfg.validate();
  std::vector<sources::RunInterval> runs;
  auto run_no = cfg.first_run;
  for (int d = 0; d < cfg.days; ++d) {
    Day day = cfg.start + std::chrono::days{d};
    auto t0 = day_start(day);
    if (cfg.shutdown && cfg.shutdown->lo <= t0 && day_end(day) <= cfg.shutdown->hi) continue;
    auto rng = stream(cfg.seed, kRunTag, static_cast<std::uint64_t>(d));
    bool hv_off = std::any_of(cfg.faults.begin(), cfg.faults.end(), [&](const FaultSpec& f) {
      return f.kind == FaultKind::hv_off_interval && f.window.lo < day_end(day) && t0 < f.window.hi;
    });
    std::uniform_int_distribution<std::int64_t> minutes(0, 120);
    if (hv_off) {
      auto start = t0 + 9h + std::chrono::minutes{minutes(rng)};
      runs.push_back({run_no++, start, start + 4h, sources::RunKind::special});
      continue;
    }
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.no_run_fraction) continue;
    auto start = t0 + 6h + std::chrono::minutes{minutes(rng)} - 1h;
    auto end = t0 + 18h - std::chrono::minutes{minutes(rng)} + 1h;
    runs.push_back({run_no++, start, end, sources::RunKind::physics});
  }
  return runs;
}

analyses::ElementMapping generate_mapping(const GenConfig& cfg) {
  analyses::ElementMapping m;
  for (int i = 0; i < cfg.rssi_elements; ++i) {
    analyses::ElementInfo info;
    info.detector = "MMG";
    info.wheel = i / 256 + 1;
    info.sector = (i / 16) % 16 + 1;
    info.layer = (i / 2) % 8 + 1;
    info.board = "L1DDC" + std::to_string(i % 2);
    info.kind = analyses::ElementKind::rssi;
    m.add(cfg.rssi_id(i), info);
  }
  for (int i = 0; i < cfg.hv_channels; ++i) {
    analyses::ElementInfo info;
    info.detector = "MMG";
    info.wheel = 1;
    info.sector = 1;
    info.layer = i % 8 + 1;
    info.board = "HV" + std::to_string(i);
    info.kind = analyses::ElementKind::hv_voltage;
    m.add(cfg.hv_id(i), info);
  }
  return m;
}

std::vector<TruthEntry> ground_truth(const GenConfig& cfg) {
  std::vector<TruthEntry> out;
  for (const auto& f : cfg.faults) out.push_back({f.element, f.kind, f.window, expected_flag_for(f.kind)});
  return out;
}

query::IntervalSet shutdown_mask(const GenConfig& cfg) {
  if (!cfg.shutdown) return query::IntervalSet({}, "shutdown");
  return query::IntervalSet({{cfg.shutdown->lo, cfg.shutdown->hi}}, "shutdown");
}

GeneratedDataset generate(const GenConfig& cfg) {
  GeneratedDataset ds;
  generate_events(cfg, [&](Day, std::span<const EventRecord> rows) { ds.events.insert(ds.events.end(), rows.begin(), rows.end()); });
  ds.runs = generate_runs(cfg);
  ds.shutdown_mask = shutdown_mask(cfg);
  ds.mapping = generate_mapping(cfg);
  ds.truth = ground_truth(cfg);
  return ds;
}

std::string truth_to_json(std::span<const TruthEntry> truth) {
  auto arr = nlohmann::json::array();
  for (const auto& t : truth) {
    arr.push_back({{"element", t.element},
                   {"fault", std::string(to_string(t.fault))},
                   {"window", {{"start", format_iso(t.window.lo)}, {"end", format_iso(t.window.hi)}}},
                   {"expected_flag", t.expected_flag}});
  }
  return arr.dump(2) + "\n";
}

std::vector<TruthEntry> truth_from_json(std::string_view text) {
  std::vector<TruthEntry> out;
  try {
    for (const auto& j : nlohmann::json::parse(text)) {
      TruthEntry t;
      t.element = j.at("element").get<ElementId>();
      t.fault = parse_fault_kind(j.at("fault").get<std::string>());
      t.window = {parse_iso(j.at("window").at("start").get<std::string>()),
                  parse_iso(j.at("window").at("end").get<std::string>())};
      t.expected_flag = j.at("expected_flag").get<std::string>();
      out.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("truth: ") + e.what());
  }
  return out;
}

void write_outputs(const GenConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto path = dir / "events.tsv";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# element_id\tts\tvalue\tstatus\n";
    generate_events(cfg, [&](Day, std::span<const EventRecord> rows) { sources::write_fixture(out, rows); });
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
  }
  auto truth = ground_truth(cfg);
  write_file_atomic(dir / "truth.json", truth_to_json(truth));
  sources::write_run_intervals(dir / "runs.tsv", generate_runs(cfg));
  shutdown_mask(cfg).save(dir / "mask.tsv");
  generate_mapping(cfg).save(dir / "mapping.tsv");
  write_file_atomic(dir / "sync.ini",
                    "[store]\nroot = store\n\n[table:eventhistory]\nmode = incremental\nsource = fixture:events.tsv\n");
}

}  // namespace dcs::simgen
