#include "dcs/ingest/schedule.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <thread>

#include "dcs/common/error.hpp"

namespace dcs::ingest {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string resolve_source(const fs::path& base, const std::string& descriptor) {
  for (const std::string prefix : {"fixture:", "sqlite:"}) {
    if (descriptor.rfind(prefix, 0) == 0) {
      std::string rest = descriptor.substr(prefix.size());
      if (rest.rfind("//", 0) == 0) return descriptor;
      return prefix + resolve(base, rest).string();
    }
  }
  return descriptor;
}

}  // namespace

ScheduleConfig ScheduleConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot read config " + file.string());
  return parse(in, fs::absolute(file).parent_path());
}

ScheduleConfig ScheduleConfig::parse(std::istream& in, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  ScheduleConfig cfg;
  bool have_store = false;
  for (const auto& [section, body] : tree) {
    if (section == "store") {
      have_store = true;
      cfg.store_root = resolve(base_dir, body.get<std::string>("root", "store"));
      if (auto c = body.get_optional<std::string>("cadence")) cfg.cadence = parse_duration(*c);
      if (cfg.cadence <= Duration::zero()) throw ValidationError("cadence must be positive");
    } else if (section.rfind("table:", 0) == 0) {
      TableJob job;
      job.table = section.substr(6);
      if (job.table.empty()) throw ValidationError("table section without a name");
      job.mode = parse_sync_mode(body.get<std::string>("mode", "incremental"));
      auto src = body.get_optional<std::string>("source");
      if (!src) throw ValidationError("table " + job.table + " has no source");
      job.source = resolve_source(base_dir, *src);
      job.source_table = body.get<std::string>("source_table", job.source_table);
      job.ts_column = body.get<std::string>("ts_column", job.ts_column);
      if (auto o = body.get_optional<std::string>("overlap")) job.overlap = parse_duration(*o);
      if (job.overlap < Duration::zero()) throw ValidationError("overlap must not be negative");
      cfg.tables.push_back(std::move(job));
    } else {
      throw ValidationError("unknown config section [" + section + "]");
    }
  }
  if (!have_store) throw ValidationError("config needs a [store] section");
  return cfg;
}

SourceFactory default_source_factory() {
  return [](const TableJob& job) { return sources::open_source(job.source, job.source_table, job.ts_column); };
}

std::vector<SyncReport> run_cycle(const ScheduleConfig& config, const SourceFactory& factory,
                                  const std::optional<std::string>& only_table) {
  std::vector<SyncReport> reports;
  for (const auto& job : config.tables) {
    if (only_table && job.table != *only_table) continue;
    SyncReport report;
    report.table = job.table;
    report.mode = job.mode;
    try {
      storage::Table table(config.store_root, job.table);
      auto source = factory(job);
      SyncOptions options;
      options.overlap = job.overlap;
      report = sync(job.mode, *source, table, options);
    } catch (const std::exception& e) {
      report.error = e.what();
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

void run_schedule(const ScheduleConfig& config, const SourceFactory& factory, std::size_t cycles,
                  const ReportSink& on_report, const Sleeper& sleep, const std::optional<std::string>& only_table) {
  for (std::size_t cycle = 0; cycles == 0 || cycle < cycles; ++cycle) {
    if (cycle > 0) {
      if (sleep) sleep(config.cadence);
      else std::this_thread::sleep_for(config.cadence);
    }
    for (const auto& r : run_cycle(config, factory, only_table)) on_report(r);
  }
}

}  // namespace dcs::ingest
