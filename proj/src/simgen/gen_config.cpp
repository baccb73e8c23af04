#include "dcs/simgen/gen_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <random>
#include <set>
#include <string>

#include "dcs/common/error.hpp"

namespace dcs::simgen {

namespace pt = boost::property_tree;

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::stuck_high: return "stuck_high";
    case FaultKind::oscillating: return "oscillating";
    case FaultKind::disabled_interval: return "disabled_interval";
    case FaultKind::hv_off_interval: return "hv_off_interval";
  }
  return "unknown";
}

FaultKind parse_fault_kind(std::string_view text) {
  if (text == "stuck_high") return FaultKind::stuck_high;
  if (text == "oscillating") return FaultKind::oscillating;
  if (text == "disabled_interval") return FaultKind::disabled_interval;
  if (text == "hv_off_interval") return FaultKind::hv_off_interval;
  throw ValidationError("unknown fault kind '" + std::string(text) + "'");
}

TimeRange tail_shutdown(const GenConfig& cfg, int days) {
  auto hi = cfg.span().hi;
  return {hi - std::chrono::days{days}, hi};
}

void GenConfig::validate() const {
  if (days < 1) throw ValidationError("days must be >= 1");
  if (rssi_elements < 0 || rssi_elements > kMaxRssi) throw ValidationError("rssi_elements must be in [0, 512]");
  if (hv_channels < 0 || hv_channels > 128) throw ValidationError("hv_channels must be in [0, 128]");
  if (hv_channels > 0 && rssi_elements > 0) {
    auto r_hi = rssi_first_id + ElementId(rssi_elements);
    auto h_hi = hv_first_id + ElementId(hv_channels);
    if (rssi_first_id < h_hi && hv_first_id < r_hi) throw ValidationError("rssi and hv id ranges overlap");
  }
  if (cadence <= Duration::zero()) throw ValidationError("cadence must be > 0");
  if (jitter < Duration::zero() || jitter * 2 >= cadence) throw ValidationError("jitter must be in [0, cadence/2)");
  if (heartbeat <= Duration::zero()) throw ValidationError("heartbeat must be > 0");
  if (!(deadband >= 0.0)) throw ValidationError("deadband must be >= 0");
  if (!(rssi_baseline_lo >= 0.0 && rssi_baseline_lo <= rssi_baseline_hi && rssi_baseline_hi < 0.45))
    throw ValidationError("rssi baseline must satisfy 0 <= lo <= hi < 0.45");
  if (!(rssi_noise >= 0.0) || !(hv_noise >= 0.0)) throw ValidationError("noise must be >= 0");
  if (!(no_run_fraction >= 0.0 && no_run_fraction <= 1.0)) throw ValidationError("no_run_fraction must be in [0, 1]");
  auto sp = span();
  if (shutdown && (!shutdown->valid() || shutdown->lo < sp.lo || shutdown->hi > sp.hi))
    throw ValidationError("shutdown must lie within the span");
  if (random_stuck_high < 0 || random_oscillating < 0 || random_disabled < 0 || random_hv_off < 0)
    throw ValidationError("random fault counts must be >= 0");
  for (const auto& f : faults) {
    auto where = "fault on element " + std::to_string(f.element) + ": ";
    if (!f.window.valid() || f.window.lo < sp.lo || f.window.hi > sp.hi)
      throw ValidationError(where + "window must be non-empty and within the span");
    if (f.kind == FaultKind::hv_off_interval) {
      if (f.element != 0 && !is_hv(f.element)) throw ValidationError(where + "not an hv channel");
    } else if (!is_rssi(f.element)) {
      throw ValidationError(where + "not an rssi element");
    }
    if (f.recovery_level && !(*f.recovery_level >= 0.0 && *f.recovery_level < 0.45))
      throw ValidationError(where + "recovery_level must be in [0, 0.45)");
  }
}

namespace {

Duration get_duration(const pt::ptree& t, const char* key, Duration def) {
  auto v = t.get_optional<std::string>(key);
  return v ? parse_duration(*v) : def;
}

template <class T>
T get_number(const pt::ptree& t, const char* key, T def) {
  if (!t.get_child_optional(key)) return def;
  try {
    return t.get<T>(key);
  } catch (const pt::ptree_error&) {
    throw ValidationError(std::string("bad value for ") + key);
  }
}

Timestamp parse_bound(const std::string& s) {
  try {
    return parse_iso(s);
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
}

}  // namespace

GenConfig GenConfig::parse(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  GenConfig c;
  int shutdown_days = 14;
  for (const auto& [name, sec] : root) {
    if (name == "generator") {
      c.seed = get_number<std::uint64_t>(sec, "seed", c.seed);
      if (auto s = sec.get_optional<std::string>("start")) {
        try {
          c.start = parse_date(*s);
        } catch (const Error& e) {
          throw ValidationError(e.what());
        }
      }
      c.days = get_number(sec, "days", c.days);
      c.rssi_elements = get_number(sec, "rssi_elements", c.rssi_elements);
      c.rssi_first_id = get_number(sec, "rssi_first_id", c.rssi_first_id);
      c.hv_channels = get_number(sec, "hv_channels", c.hv_channels);
      c.hv_first_id = get_number(sec, "hv_first_id", c.hv_first_id);
      try {
        c.cadence = get_duration(sec, "cadence", c.cadence);
        c.jitter = get_duration(sec, "jitter", c.jitter);
        c.heartbeat = get_duration(sec, "heartbeat", c.heartbeat);
      } catch (const ParseError& e) {
        throw ValidationError(e.what());
      }
      c.deadband = get_number(sec, "deadband", c.deadband);
      c.rssi_baseline_lo = get_number(sec, "rssi_baseline_lo", c.rssi_baseline_lo);
      c.rssi_baseline_hi = get_number(sec, "rssi_baseline_hi", c.rssi_baseline_hi);
      c.rssi_noise = get_number(sec, "rssi_noise", c.rssi_noise);
      c.hv_nominal = get_number(sec, "hv_nominal", c.hv_nominal);
      c.hv_noise = get_number(sec, "hv_noise", c.hv_noise);
      shutdown_days = get_number(sec, "shutdown_days", shutdown_days);
      auto s0 = sec.get_optional<std::string>("shutdown_start");
      auto s1 = sec.get_optional<std::string>("shutdown_end");
      if (s0.has_value() != s1.has_value()) throw ValidationError("shutdown_start and shutdown_end go together");
      if (s0) c.shutdown = TimeRange{parse_bound(*s0), parse_bound(*s1)};
      c.no_run_fraction = get_number(sec, "no_run_fraction", c.no_run_fraction);
      c.first_run = get_number(sec, "first_run", c.first_run);
      c.random_stuck_high = get_number(sec, "random_stuck_high", 0);
      c.random_oscillating = get_number(sec, "random_oscillating", 0);
      c.random_disabled = get_number(sec, "random_disabled", 0);
      c.random_hv_off = get_number(sec, "random_hv_off", 0);
    } else if (name.rfind("fault", 0) == 0) {
      FaultSpec f;
      f.element = get_number<ElementId>(sec, "element", 0);
      f.kind = parse_fault_kind(sec.get<std::string>("kind", ""));
      auto s = sec.get_optional<std::string>("start");
      auto e = sec.get_optional<std::string>("end");
      if (!s || !e) throw ValidationError("[" + name + "] needs start and end");
      f.window = {parse_bound(*s), parse_bound(*e)};
      if (auto r = sec.get_optional<double>("recovery_level")) f.recovery_level = *r;
      c.faults.push_back(f);
    } else {
      throw ValidationError("unknown section [" + name + "]");
    }
  }
  if (!c.shutdown && shutdown_days > 0) {
    if (shutdown_days >= c.days) throw ValidationError("shutdown_days must be smaller than days");
    c.shutdown = tail_shutdown(c, shutdown_days);
  }
  c.validate();
  return c;
}

GenConfig GenConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot read generator config " + file.string());
  return parse(in);
}

void expand_random_faults(GenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed ^ 0x5f3759df9e3779b9ULL);
  std::set<ElementId> used;
  for (const auto& f : cfg.faults) used.insert(f.element);

  // Faults live in whole days before the shutdown (or the span end).
  int usable = cfg.days;
  if (cfg.shutdown) usable = static_cast<int>(std::chrono::floor<std::chrono::days>(cfg.shutdown->lo - cfg.span().lo).count());

  auto pick_window = [&](int min_len, int max_len) {
    if (usable < min_len + 2) throw ValidationError("span too short for random faults");
    max_len = std::min(max_len, usable - 2);
    int len = std::uniform_int_distribution<int>(min_len, max_len)(rng);
    int first = std::uniform_int_distribution<int>(1, usable - len - 1)(rng);
    auto lo = day_start(cfg.start + std::chrono::days{first});
    return TimeRange{lo, lo + std::chrono::days{len}};
  };
  auto pick_rssi = [&] {
    if (static_cast<int>(used.size()) >= cfg.rssi_elements) throw ValidationError("more faults than rssi elements");
    std::uniform_int_distribution<int> d(0, cfg.rssi_elements - 1);
    while (true) {
      auto id = cfg.rssi_id(d(rng));
      if (used.insert(id).second) return id;
    }
  };

  for (int i = 0; i < cfg.random_stuck_high; ++i) {
    FaultSpec f{pick_rssi(), FaultKind::stuck_high, pick_window(6, 30), std::nullopt};
    if (std::bernoulli_distribution(0.5)(rng)) f.recovery_level = std::uniform_real_distribution<double>(0.05, 0.12)(rng);
    cfg.faults.push_back(f);
  }
  for (int i = 0; i < cfg.random_oscillating; ++i)
    cfg.faults.push_back({pick_rssi(), FaultKind::oscillating, pick_window(4, 20), std::nullopt});
  for (int i = 0; i < cfg.random_disabled; ++i)
    cfg.faults.push_back({pick_rssi(), FaultKind::disabled_interval, pick_window(2, 15), std::nullopt});
  for (int i = 0; i < cfg.random_hv_off; ++i)
    cfg.faults.push_back({0, FaultKind::hv_off_interval, pick_window(1, 1), std::nullopt});
  cfg.random_stuck_high = cfg.random_oscillating = cfg.random_disabled = cfg.random_hv_off = 0;
  cfg.validate();
}

}  // namespace dcs::simgen
