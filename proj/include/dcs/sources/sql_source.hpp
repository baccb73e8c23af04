#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dcs/sources/source.hpp"

namespace dcs::sources {

/// Where an SQL archive lives. Accepted forms:
///   sqlite:/path/to/archive.db        sqlite:///path/to/archive.db
///   <scheme>://host[:port]/database
/// Credentials never appear in the descriptor; they are read from
/// DCS_SOURCE_USER and DCS_SOURCE_PASSWORD.
struct EndpointDescriptor {
  std::string scheme;
  std::string host;
  std::optional<int> port;
  std::string database;
  std::string user;
  std::string password;

  /// Throws SourceError for malformed descriptors or inline credentials.
  static EndpointDescriptor parse(std::string_view text);
};

using SqlValue = std::variant<std::monostate, std::int64_t, double, std::string>;
using SqlRow = std::vector<SqlValue>;

/// Minimal read-only statement interface so the source can run against any engine.
class SqlConnection {
 public:
  virtual ~SqlConnection() = default;
  virtual void query(const std::string& sql, std::span<const SqlValue> params,
                     const std::function<void(const SqlRow&)>& on_row) = 0;
};

/// Opens a read-only connection. Only the sqlite scheme has a driver in
/// this build; other schemes raise SourceError.
std::unique_ptr<SqlConnection> connect(const EndpointDescriptor& endpoint);

/// Archive table behind an SQL endpoint. Issues only
///   SELECT element_id, <ts>, value, status FROM <table>
///   WHERE <ts> > ? ORDER BY <ts>, element_id
/// The ts column holds integer microseconds since the epoch or ISO-8601 text.
class SqlSource : public Source {
 public:
  SqlSource(std::unique_ptr<SqlConnection> connection, std::string table, std::string ts_column,
            std::string label = "sql");

  static std::unique_ptr<SqlSource> open(const std::string& descriptor, const std::string& table,
                                         const std::string& ts_column);

  std::string describe() const override { return label_ + ":" + table_; }
  void read_after(std::optional<Timestamp> cursor, const RowSink& sink) override;

 private:
  std::unique_ptr<SqlConnection> connection_;
  std::string table_;
  std::string ts_column_;
  std::string label_;
};

/// Converts an SQL cell to a timestamp (integer microseconds or ISO text).
Timestamp sql_timestamp(const SqlValue& v);

/// Rejects anything but [A-Za-z_][A-Za-z0-9_]*.
void validate_identifier(const std::string& name);

}  // namespace dcs::sources
