#include "dcs/sources/sql_source.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "dcs/common/error.hpp"

namespace dcs::sources {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

class SqliteConnection : public SqlConnection {
 public:
  explicit SqliteConnection(const std::string& path) {
    int rc = sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READONLY, nullptr);
    if (rc != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      db_ = nullptr;
      throw SourceError("cannot open sqlite archive " + path + ": " + msg);
    }
  }
  ~SqliteConnection() override { sqlite3_close(db_); }

  void query(const std::string& sql, std::span<const SqlValue> params,
             const std::function<void(const SqlRow&)>& on_row) override {
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
      throw SourceError(std::string("query failed: ") + sqlite3_errmsg(db_));
    struct Finalizer {
      sqlite3_stmt* s;
      ~Finalizer() { sqlite3_finalize(s); }
    } finalizer{stmt};
    if (!sqlite3_stmt_readonly(stmt)) throw SourceError("refusing to run a non read-only statement");
    for (std::size_t i = 0; i < params.size(); ++i) {
      int idx = static_cast<int>(i + 1);
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) sqlite3_bind_null(stmt, idx);
            else if constexpr (std::is_same_v<T, std::int64_t>) sqlite3_bind_int64(stmt, idx, v);
            else if constexpr (std::is_same_v<T, double>) sqlite3_bind_double(stmt, idx, v);
            else sqlite3_bind_text(stmt, idx, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
          },
          params[i]);
    }
    SqlRow row;
    while (true) {
      int rc = sqlite3_step(stmt);
      if (rc == SQLITE_DONE) break;
      if (rc != SQLITE_ROW) throw SourceError(std::string("query failed: ") + sqlite3_errmsg(db_));
      int n = sqlite3_column_count(stmt);
      row.assign(static_cast<std::size_t>(n), std::monostate{});
      for (int c = 0; c < n; ++c) {
        switch (sqlite3_column_type(stmt, c)) {
          case SQLITE_INTEGER: row[c] = static_cast<std::int64_t>(sqlite3_column_int64(stmt, c)); break;
          case SQLITE_FLOAT: row[c] = sqlite3_column_double(stmt, c); break;
          case SQLITE_TEXT:
            row[c] = std::string(reinterpret_cast<const char*>(sqlite3_column_text(stmt, c)),
                                 static_cast<std::size_t>(sqlite3_column_bytes(stmt, c)));
            break;
          default: break;
        }
      }
      on_row(row);
    }
  }

 private:
  sqlite3* db_ = nullptr;
};

double as_double(const SqlValue& v) {
  if (auto p = std::get_if<double>(&v)) return *p;
  if (auto p = std::get_if<std::int64_t>(&v)) return static_cast<double>(*p);
  throw SourceError("expected a numeric value column");
}

std::int64_t as_int(const SqlValue& v, const char* what) {
  if (auto p = std::get_if<std::int64_t>(&v)) return *p;
  throw SourceError(std::string("expected an integer ") + what);
}

}  // namespace

void validate_identifier(const std::string& name) {
  bool ok = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name) ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
  if (!ok) throw ValidationError("invalid SQL identifier '" + name + "'");
}

EndpointDescriptor EndpointDescriptor::parse(std::string_view text) {
  EndpointDescriptor d;
  auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0) throw SourceError("endpoint descriptor needs a scheme: '" + std::string(text) + "'");
  d.scheme = std::string(text.substr(0, colon));
  std::string_view rest = text.substr(colon + 1);
  d.user = env_or_empty("DCS_SOURCE_USER");
  d.password = env_or_empty("DCS_SOURCE_PASSWORD");
  if (d.scheme == "sqlite") {
    if (rest.rfind("//", 0) == 0) rest.remove_prefix(2);
    if (rest.empty()) throw SourceError("sqlite descriptor needs a database path");
    d.database = std::string(rest);
    return d;
  }
  if (rest.rfind("//", 0) != 0) throw SourceError("expected <scheme>://host[:port]/database");
  rest.remove_prefix(2);
  auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (authority.find('@') != std::string_view::npos)
    throw SourceError("credentials must come from DCS_SOURCE_USER / DCS_SOURCE_PASSWORD, not the descriptor");
  d.database = slash == std::string_view::npos ? "" : std::string(rest.substr(slash + 1));
  auto port_sep = authority.rfind(':');
  if (port_sep != std::string_view::npos) {
    int port = 0;
    auto ps = authority.substr(port_sep + 1);
    auto [ptr, ec] = std::from_chars(ps.data(), ps.data() + ps.size(), port);
    if (ec != std::errc{} || ptr != ps.data() + ps.size() || port <= 0 || port > 65535)
      throw SourceError("bad port in endpoint descriptor");
    d.port = port;
    authority = authority.substr(0, port_sep);
  }
  d.host = std::string(authority);
  if (d.host.empty()) throw SourceError("endpoint descriptor needs a host");
  return d;
}

std::unique_ptr<SqlConnection> connect(const EndpointDescriptor& endpoint) {
  if (endpoint.scheme == "sqlite") return std::make_unique<SqliteConnection>(endpoint.database);
  throw SourceError("no SQL driver for scheme '" + endpoint.scheme + "' in this build");
}

Timestamp sql_timestamp(const SqlValue& v) {
  if (auto p = std::get_if<std::int64_t>(&v)) return from_micros(*p);
  if (auto p = std::get_if<std::string>(&v)) return parse_iso(*p);
  throw SourceError("timestamp column must hold integer microseconds or ISO-8601 text");
}

SqlSource::SqlSource(std::unique_ptr<SqlConnection> connection, std::string table, std::string ts_column,
                     std::string label)
    : connection_(std::move(connection)), table_(std::move(table)), ts_column_(std::move(ts_column)),
      label_(std::move(label)) {
  validate_identifier(table_);
  validate_identifier(ts_column_);
}

std::unique_ptr<SqlSource> SqlSource::open(const std::string& descriptor, const std::string& table,
                                           const std::string& ts_column) {
  EndpointDescriptor endpoint = EndpointDescriptor::parse(descriptor);
  return std::make_unique<SqlSource>(connect(endpoint), table, ts_column, endpoint.scheme);
}

void SqlSource::read_after(std::optional<Timestamp> cursor, const RowSink& sink) {
  std::string sql = "SELECT element_id, " + ts_column_ + ", value, status FROM " + table_;
  std::vector<SqlValue> params;
  if (cursor) {
    sql += " WHERE " + ts_column_ + " > ?";
    params.emplace_back(to_micros(*cursor));
  }
  sql += " ORDER BY " + ts_column_ + ", element_id";

  constexpr std::size_t kChunk = 1 << 16;
  std::vector<SourceRow> chunk;
  chunk.reserve(kChunk);
  bool text_ts = false;
  std::vector<SourceRow> all;
  connection_->query(sql, params, [&](const SqlRow& row) {
    if (row.size() != 4) throw SourceError("unexpected column count from " + describe());
    SourceRow r;
    r.element_id = static_cast<ElementId>(as_int(row[0], "element_id"));
    text_ts = text_ts || std::holds_alternative<std::string>(row[1]);
    r.ts = sql_timestamp(row[1]);
    r.value = as_double(row[2]);
    if (!std::holds_alternative<std::monostate>(row[3])) r.status = static_cast<std::int16_t>(as_int(row[3], "status"));
    if (text_ts) {
      all.push_back(r);
      return;
    }
    chunk.push_back(r);
    if (chunk.size() == kChunk) {
      sink(chunk);
      chunk.clear();
    }
  });
  if (!text_ts) {
    if (!chunk.empty()) sink(chunk);
    return;
  }
  // ISO text compares lexically in SQL; re-filter and re-order on parsed values.
  all.insert(all.begin(), chunk.begin(), chunk.end());
  if (cursor) std::erase_if(all, [&](const SourceRow& r) { return r.ts <= *cursor; });
  sort_by_time(all);
  for (std::size_t i = 0; i < all.size(); i += kChunk)
    sink(std::span<const SourceRow>(all).subspan(i, std::min(kChunk, all.size() - i)));
}

}  // namespace dcs::sources
