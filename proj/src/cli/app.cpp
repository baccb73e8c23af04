#include "dcs/cli/app.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "dcs/cli/pipeline.hpp"
#include "dcs/cli/report.hpp"
#include "dcs/common/error.hpp"
#include "dcs/ingest/schedule.hpp"
#include "dcs/query/semijoin.hpp"
#include "dcs/simgen/generator.hpp"
#include "dcs/sources/run_intervals.hpp"

namespace dcs::cli {

namespace {

using json = nlohmann::ordered_json;

struct Common {
  std::string table = "eventhistory";
  std::string from;
  std::string to;
  std::string elements;
  std::string format = "csv";
  std::string drop_mask;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--table", c.table, "table name")->capture_default_str();
  cmd->add_option("--from", c.from, "range start, ISO-8601 UTC (inclusive)")->required();
  cmd->add_option("--to", c.to, "range end, ISO-8601 UTC (exclusive)")->required();
  cmd->add_option("--elements", c.elements, "element ids, e.g. 1,2,10-20");
  cmd->add_option("--format", c.format, "csv or json")->capture_default_str();
  cmd->add_option("--drop-mask", c.drop_mask, "mask file; masked time is excluded");
  cmd->add_option("--threads", c.threads, "partitions decoded concurrently")->capture_default_str();
}

TimeRange parse_range(const Common& c) {
  TimeRange r;
  try {
    r = {parse_iso(c.from), parse_iso(c.to)};
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  if (!r.valid()) throw ValidationError("--from must be before --to");
  return r;
}

std::optional<ElementSet> parse_elements(const Common& c) {
  if (c.elements.empty()) return std::nullopt;
  return parse_element_list(c.elements);
}

Duration parse_width(const std::string& text) {
  try {
    auto d = parse_duration(text);
    if (d <= Duration::zero()) throw ValidationError("bin width must be > 0");
    return d;
  } catch (const ParseError& e) {
    throw ValidationError(e.what());
  }
}

template <class F>
auto load_input(const std::string& path, const char* what, F&& loader) {
  if (!std::filesystem::exists(path)) throw ValidationError(std::string(what) + " file not found: " + path);
  try {
    return loader(path);
  } catch (const ParseError& e) {
    throw ValidationError(std::string(what) + " " + path + ": " + e.what());
  }
}

analyses::ElementMapping load_mapping(const std::string& path) {
  return load_input(path, "mapping", [](const std::string& p) { return analyses::ElementMapping::load(p); });
}

query::IntervalSet load_mask(const std::string& path) {
  return load_input(path, "mask", [](const std::string& p) { return query::IntervalSet::load(p); });
}

std::vector<sources::RunInterval> load_runs(const std::string& path) {
  return load_input(path, "runs", [](const std::string& p) { return sources::fetch_run_intervals(p); });
}

void base_parameters(Report& r, const std::string& command, const Common& c, TimeRange range) {
  r.parameters["command"] = command;
  r.parameters["table"] = c.table;
  r.parameters["from"] = format_iso(range.lo);
  r.parameters["to"] = format_iso(range.hi);
  if (!c.elements.empty()) r.parameters["elements"] = c.elements;
  if (!c.drop_mask.empty()) r.parameters["drop_mask"] = c.drop_mask;
}

struct RuleParams {
  double threshold = 0.45;
  std::uint64_t min_occurrences = 3;
  double hard_failure = 0.5;
  std::string count_by = "bins";
  double std_threshold = 0.05;
  std::uint64_t min_bins = 3;
  std::string scope = "per_bin";
  std::string bin = "1d";
  std::string staleness = "24h";
  bool no_pushdown = false;
};

void add_high_rssi_options(CLI::App* cmd, RuleParams& p) {
  cmd->add_option("--threshold", p.threshold, "RSSI threshold in V (strict)")->capture_default_str();
  cmd->add_option("--min-occurrences", p.min_occurrences, "flag when occurrences exceed this")->capture_default_str();
  cmd->add_option("--hard-failure", p.hard_failure, "hard failure level in V")->capture_default_str();
  cmd->add_option("--count-by", p.count_by, "bins or samples")->capture_default_str();
  cmd->add_flag("--no-pushdown", p.no_pushdown, "scan all values instead of pushing the threshold down");
}

void add_oscillation_options(CLI::App* cmd, RuleParams& p) {
  cmd->add_option("--std-threshold", p.std_threshold, "std threshold in V (strict)")->capture_default_str();
  cmd->add_option("--min-bins", p.min_bins, "bins above the std threshold")->capture_default_str();
  cmd->add_option("--scope", p.scope, "per_bin or whole_window")->capture_default_str();
}

HighRssiOptions high_rssi_options(const RuleParams& p, Report& r) {
  HighRssiOptions o;
  o.params = {p.threshold, p.min_occurrences, p.hard_failure};
  o.bin = parse_width(p.bin);
  if (p.count_by != "bins" && p.count_by != "samples") throw ValidationError("--count-by must be bins or samples");
  o.count_samples = p.count_by == "samples";
  o.pushdown = !p.no_pushdown;
  r.parameters["threshold"] = p.threshold;
  r.parameters["min_occurrences"] = p.min_occurrences;
  r.parameters["hard_failure"] = p.hard_failure;
  r.parameters["count_by"] = p.count_by;
  r.parameters["bin"] = format_duration(o.bin);
  return o;
}

OscillationOptions oscillation_options(const RuleParams& p, Report& r) {
  OscillationOptions o;
  o.params = {p.std_threshold, p.min_bins, analyses::parse_std_scope(p.scope)};
  o.bin = parse_width(p.bin);
  r.parameters["std_threshold"] = p.std_threshold;
  r.parameters["min_bins"] = p.min_bins;
  r.parameters["scope"] = std::string(to_string(o.params.scope));
  r.parameters["bin"] = format_duration(o.bin);
  return o;
}

Duration staleness_option(const RuleParams& p, Report& r) {
  auto d = parse_width(p.staleness);
  r.parameters["staleness"] = format_duration(d);
  return d;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DCS archive toolkit: generate, sync, query and analyze detector control data", "dcsctl"};
  app.require_subcommand(1);
  std::string store = "store";
  app.add_option("--store", store, "store root directory")->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset with ground truth");
  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_seed;
  std::optional<int> gen_days, gen_rssi, gen_hv, r_stuck, r_osc, r_dis, r_hv;
  gen->add_option("--config", gen_config, "generator config file");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--days", gen_days, "span length in days");
  gen->add_option("--rssi-elements", gen_rssi, "number of rssi links");
  gen->add_option("--hv-channels", gen_hv, "number of hv channels");
  gen->add_option("--random-stuck-high", r_stuck, "random stuck_high faults");
  gen->add_option("--random-oscillating", r_osc, "random oscillating faults");
  gen->add_option("--random-disabled", r_dis, "random disabled_interval faults");
  gen->add_option("--random-hv-off", r_hv, "random hv_off_interval faults");

  // sync
  auto* sync = app.add_subcommand("sync", "replicate source tables into the store");
  std::string sync_config, sync_table;
  bool once = false, loop = false;
  std::size_t cycles = 0;
  sync->add_option("--config", sync_config, "sync config file")->required();
  sync->add_option("--table", sync_table, "only this table");
  auto* once_flag = sync->add_flag("--once", once, "run one cycle (default)");
  sync->add_flag("--loop", loop, "repeat at the configured cadence")->excludes(once_flag);
  sync->add_option("--cycles", cycles, "with --loop, stop after this many cycles (0 = forever)");

  // query
  auto* query = app.add_subcommand("query", "scan, bin and filter stored data");
  Common qc;
  std::string q_bin, q_agg = "all", q_keep_runs, q_value_gt, q_value_lt;
  add_common(query, qc);
  query->add_option("--bin", q_bin, "bin width, e.g. 1h or 1d; raw rows when omitted");
  query->add_option("--agg", q_agg, "count,min,max,mean,std,last")->capture_default_str();
  query->add_option("--keep-runs", q_keep_runs, "run file; only times inside runs are kept");
  query->add_option("--value-gt", q_value_gt, "only values > X");
  query->add_option("--value-lt", q_value_lt, "only values < X");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "link and channel health analyses");
  analyze->require_subcommand(1);
  Common ac;
  RuleParams rp;
  std::string mapping_path, runs_path, heat_rule = "high_rssi";
  double nominal = 505.0;
  int wheel = 1;

  auto* fl = analyze->add_subcommand("failed-links", "links whose RSSI exceeds the threshold too often");
  add_common(fl, ac);
  fl->add_option("--mapping", mapping_path, "element mapping file")->required();
  fl->add_option("--bin", rp.bin, "bin width")->capture_default_str();
  add_high_rssi_options(fl, rp);

  auto* osc = analyze->add_subcommand("oscillating", "links with unstable RSSI");
  add_common(osc, ac);
  osc->add_option("--mapping", mapping_path, "element mapping file")->required();
  osc->add_option("--bin", rp.bin, "bin width")->capture_default_str();
  add_oscillation_options(osc, rp);

  auto* st = analyze->add_subcommand("stale", "elements that stopped updating");
  add_common(st, ac);
  st->add_option("--mapping", mapping_path, "element mapping file (selects rssi elements)");
  st->add_option("--staleness", rp.staleness, "silence longer than this is stale")->capture_default_str();

  auto* hv = analyze->add_subcommand("hv-nominal", "hv channels at nominal voltage per run day");
  add_common(hv, ac);
  hv->add_option("--mapping", mapping_path, "element mapping file (selects hv_voltage channels)");
  hv->add_option("--runs", runs_path, "run interval file")->required();
  hv->add_option("--nominal", nominal, "nominal voltage in V")->capture_default_str();

  auto* heat = analyze->add_subcommand("heatmap", "flagged links per layer and sector");
  add_common(heat, ac);
  heat->add_option("--mapping", mapping_path, "element mapping file")->required();
  heat->add_option("--rule", heat_rule, "high_rssi, oscillating or stale")->capture_default_str();
  heat->add_option("--wheel", wheel, "wheel 1 or 2")->capture_default_str();
  heat->add_option("--bin", rp.bin, "bin width")->capture_default_str();
  heat->add_option("--staleness", rp.staleness, "stale rule threshold")->capture_default_str();
  add_high_rssi_options(heat, rp);
  add_oscillation_options(heat, rp);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "dcsctl: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen) {
      simgen::GenConfig cfg;
      if (!gen_config.empty()) {
        if (!std::filesystem::exists(gen_config)) throw ValidationError("config file not found: " + gen_config);
        cfg = simgen::GenConfig::load(gen_config);
      } else {
        cfg.shutdown = simgen::tail_shutdown(cfg, 14);
      }
      if (gen_seed) cfg.seed = *gen_seed;
      if (gen_days) {
        cfg.days = *gen_days;
        if (gen_config.empty()) cfg.shutdown = cfg.days > 28 ? std::optional(simgen::tail_shutdown(cfg, 14)) : std::nullopt;
      }
      if (gen_rssi) cfg.rssi_elements = *gen_rssi;
      if (gen_hv) cfg.hv_channels = *gen_hv;
      if (r_stuck) cfg.random_stuck_high = *r_stuck;
      if (r_osc) cfg.random_oscillating = *r_osc;
      if (r_dis) cfg.random_disabled = *r_dis;
      if (r_hv) cfg.random_hv_off = *r_hv;
      simgen::expand_random_faults(cfg);
      simgen::write_outputs(cfg, gen_out);
      err << "gen: wrote " << gen_out << " (seed " << cfg.seed << ", " << cfg.faults.size() << " faults)\n";
      return kExitOk;
    }

    if (*sync) {
      auto cfg = ingest::ScheduleConfig::load(sync_config);
      std::optional<std::string> only;
      if (!sync_table.empty()) only = sync_table;
      bool failed = false;
      auto emit = [&](const ingest::SyncReport& r) {
        out << ingest::to_json(r).dump() << '\n';
        out.flush();
        failed = failed || !r.ok();
      };
      if (loop) {
        ingest::run_schedule(cfg, ingest::default_source_factory(), cycles, emit, {}, only);
      } else {
        for (const auto& r : ingest::run_cycle(cfg, ingest::default_source_factory(), only)) emit(r);
      }
      return failed ? kExitFailure : kExitOk;
    }

    storage::Table table(store, (*query ? qc : ac).table);
    auto manifest = table.current();

    if (*query) {
      auto range = parse_range(qc);
      auto format = parse_format(qc.format);
      Report report;
      base_parameters(report, "query", qc, range);
      storage::ScanRequest req;
      req.range = range;
      req.elements = parse_elements(qc);
      req.parallelism = qc.threads;
      auto to_double = [](const std::string& s) {
        try {
          std::size_t pos = 0;
          double v = std::stod(s, &pos);
          if (pos != s.size()) throw std::invalid_argument(s);
          return v;
        } catch (const std::exception&) {
          throw ValidationError("bad number '" + s + "'");
        }
      };
      if (!q_value_gt.empty() || !q_value_lt.empty()) {
        double lo = q_value_gt.empty() ? -std::numeric_limits<double>::infinity() : to_double(q_value_gt);
        double hi = q_value_lt.empty() ? std::numeric_limits<double>::infinity() : to_double(q_value_lt);
        req.value = storage::ValuePredicate{{lo, hi, !q_value_gt.empty(), !q_value_lt.empty()}};
        if (!q_value_gt.empty()) report.parameters["value_gt"] = lo;
        if (!q_value_lt.empty()) report.parameters["value_lt"] = hi;
      }
      std::optional<query::IntervalSet> keep, drop;
      if (!q_keep_runs.empty()) {
        auto runs = load_runs(q_keep_runs);
        keep = query::IntervalSet::from_runs(runs);
        report.parameters["keep_runs"] = q_keep_runs;
      }
      if (!qc.drop_mask.empty()) drop = load_mask(qc.drop_mask);
      storage::ScanStats stats;
      if (q_bin.empty()) {
        auto [rows, s] = storage::scan_records(table, *manifest, req);
        stats = s;
        if (keep) rows = query::interval_semijoin(rows, *keep, query::JoinMode::keep);
        if (drop) rows = query::interval_semijoin(rows, *drop, query::JoinMode::drop);
        add_record_rows(report, rows);
      } else {
        auto width = parse_width(q_bin);
        auto aggs = parse_aggs(q_agg);
        report.parameters["bin"] = format_duration(width);
        report.parameters["agg"] = q_agg;
        auto [binned, s] = query::time_bin(table, *manifest, req, width);
        stats = s;
        if (keep) binned = query::interval_semijoin(binned, *keep, query::JoinMode::keep);
        if (drop) binned = query::interval_semijoin(binned, *drop, query::JoinMode::drop);
        set_bin_columns(report, aggs);
        add_bin_rows(report, binned, aggs);
      }
      report.write(out, format);
      err << format_stats(stats) << '\n';
      return kExitOk;
    }

    // analyze
    auto range = parse_range(ac);
    auto format = parse_format(ac.format);
    AnalysisScope scope;
    scope.range = range;
    scope.elements = parse_elements(ac);
    scope.parallelism = ac.threads;
    std::optional<query::IntervalSet> mask;
    if (!ac.drop_mask.empty()) {
      mask = load_mask(ac.drop_mask);
      scope.drop_mask = &*mask;
    }
    std::optional<analyses::ElementMapping> mapping;
    if (!mapping_path.empty()) mapping = load_mapping(mapping_path);
    Report params;
    storage::ScanStats stats;
    Report report;

    if (*fl) {
      base_parameters(params, "analyze failed-links", ac, range);
      auto opts = high_rssi_options(rp, params);
      auto run = failed_links(table, *manifest, scope, *mapping, opts);
      report = flag_report(analyses::FlagRule::high_rssi, run.flags);
      stats = run.stats;
    } else if (*osc) {
      base_parameters(params, "analyze oscillating", ac, range);
      auto opts = oscillation_options(rp, params);
      auto run = oscillating_links(table, *manifest, scope, *mapping, opts);
      report = flag_report(analyses::FlagRule::oscillating, run.flags);
      stats = run.stats;
    } else if (*st) {
      base_parameters(params, "analyze stale", ac, range);
      auto staleness = staleness_option(rp, params);
      auto run = stale_links(table, *manifest, scope, mapping ? &*mapping : nullptr, staleness);
      report = flag_report(analyses::FlagRule::stale, run.flags);
      stats = run.stats;
    } else if (*hv) {
      base_parameters(params, "analyze hv-nominal", ac, range);
      params.parameters["nominal"] = nominal;
      params.parameters["runs"] = runs_path;
      auto runs = query::IntervalSet::from_runs(load_runs(runs_path));
      auto res = hv_nominal(table, *manifest, scope, mapping ? &*mapping : nullptr, nominal, runs);
      report = counts_report(res.counts);
      stats = res.stats;
    } else {
      base_parameters(params, "analyze heatmap", ac, range);
      params.parameters["rule"] = heat_rule;
      params.parameters["wheel"] = wheel;
      if (wheel < 1 || wheel > analyses::kWheels) throw ValidationError("--wheel must be 1 or 2");
      if (scope.elements) {
        std::vector<ElementId> missing;
        for (auto id : *scope.elements)
          if (!mapping->find(id)) missing.push_back(id);
        if (!missing.empty()) throw analyses::UnmappedElementsError(std::move(missing));
      }
      FlagRun run;
      if (heat_rule == "high_rssi") {
        run = failed_links(table, *manifest, scope, *mapping, high_rssi_options(rp, params));
      } else if (heat_rule == "oscillating") {
        run = oscillating_links(table, *manifest, scope, *mapping, oscillation_options(rp, params));
      } else if (heat_rule == "stale") {
        run = stale_links(table, *manifest, scope, &*mapping, staleness_option(rp, params));
      } else {
        throw ValidationError("--rule must be high_rssi, oscillating or stale");
      }
      report = grid_report(analyses::geometry_grid(run.flags, *mapping, wheel));
      stats = run.stats;
    }
    report.parameters = std::move(params.parameters);
    report.write(out, format);
    err << format_stats(stats) << '\n';
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "dcsctl: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "dcsctl: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "dcsctl: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace dcs::cli
