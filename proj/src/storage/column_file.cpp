#include "dcs/storage/column_file.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>

#include "dcs/common/error.hpp"
#include "dcs/common/file_util.hpp"

static_assert(std::endian::native == std::endian::little, "column files assume a little-endian host");

namespace dcs::storage {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'D', 'C', 'O', 'L'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kGroupInfoBytes = 4 + 4 + 4 + 8 + 8 + 8 + 8 + 4 * (8 + 4 + 4 + 4);

enum ChunkIndex : std::size_t { kElement = 0, kTs = 1, kValue = 2, kStatus = 3 };

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes.insert(bytes.end(), buf, buf + sizeof(T));
  }
  void put_varint(std::uint64_t v) {
    while (v >= 0x80) {
      bytes.push_back(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    bytes.push_back(static_cast<std::uint8_t>(v));
  }
  void append(std::span<const std::uint8_t> data) { bytes.insert(bytes.end(), data.begin(), data.end()); }

  std::vector<std::uint8_t> bytes;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, const fs::path& file) : data_(data), file_(file) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::uint64_t get_varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      need(1);
      std::uint8_t b = data_[pos_++];
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return v;
    }
    throw ScanError(file_.string(), "malformed varint");
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw ScanError(file_.string(), "truncated column data");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  const fs::path& file_;
};

std::uint64_t zigzag(std::int64_t v) { return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63); }
std::int64_t unzigzag(std::uint64_t v) { return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1); }

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
  return static_cast<std::uint32_t>(::crc32(0L, data.data(), static_cast<uInt>(data.size())));
}

std::vector<std::uint8_t> deflate_bytes(std::span<const std::uint8_t> raw, int level) {
  uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> out(bound);
  if (::compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), level) != Z_OK)
    throw IoError("zlib compression failed");
  out.resize(bound);
  return out;
}

std::vector<std::uint8_t> encode_elements(std::span<const EventRecord> rows) {
  ByteWriter w;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].element_id == rows[i].element_id) ++j;
    w.put<std::uint32_t>(rows[i].element_id);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return std::move(w.bytes);
}

std::vector<std::uint8_t> encode_ts(std::span<const EventRecord> rows) {
  ByteWriter w;
  std::int64_t prev = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::int64_t t = to_micros(rows[i].ts);
    if (i == 0) w.put<std::int64_t>(t);
    else w.put_varint(zigzag(t - prev));
    prev = t;
  }
  return std::move(w.bytes);
}

std::vector<std::uint8_t> encode_values(std::span<const EventRecord> rows) {
  ByteWriter w;
  w.bytes.reserve(rows.size() * sizeof(double));
  for (const auto& r : rows) w.put<double>(r.value);
  return std::move(w.bytes);
}

std::vector<std::uint8_t> encode_status(std::span<const EventRecord> rows) {
  ByteWriter w;
  std::vector<std::uint8_t> bitmap((rows.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].status) bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  w.append(bitmap);
  for (const auto& r : rows) {
    if (r.status) w.put<std::int16_t>(*r.status);
  }
  return std::move(w.bytes);
}

}  // namespace

DataStats DataStats::of(std::span<const EventRecord> rows) {
  DataStats s;
  s.rows = rows.size();
  if (rows.empty()) return s;
  s.min_ts = s.max_ts = rows.front().ts;
  s.min_value = s.max_value = rows.front().value;
  std::vector<ElementId> ids;
  ids.reserve(rows.size());
  for (const auto& r : rows) {
    s.min_ts = std::min(s.min_ts, r.ts);
    s.max_ts = std::max(s.max_ts, r.ts);
    s.min_value = std::min(s.min_value, r.value);
    s.max_value = std::max(s.max_value, r.value);
    ids.push_back(r.element_id);
  }
  std::sort(ids.begin(), ids.end());
  s.elements = ElementDigest::from_sorted(ids);
  return s;
}

DataStats DataStats::merged(const DataStats& other) const {
  if (rows == 0) return other;
  if (other.rows == 0) return *this;
  DataStats s;
  s.rows = rows + other.rows;
  s.min_ts = std::min(min_ts, other.min_ts);
  s.max_ts = std::max(max_ts, other.max_ts);
  s.min_value = std::min(min_value, other.min_value);
  s.max_value = std::max(max_value, other.max_value);
  s.elements = elements.merged(other.elements);
  return s;
}

DataStats write_column_file(const fs::path& path, std::span<const EventRecord> rows, const WriteOptions& options) {
  const std::size_t group_rows = std::max<std::size_t>(options.row_group_rows, 1);
  ByteWriter body;
  body.bytes.insert(body.bytes.end(), kMagic, kMagic + 4);
  body.put<std::uint32_t>(kFormatVersion);

  ByteWriter footer;
  const std::size_t n_groups = (rows.size() + group_rows - 1) / group_rows;
  footer.put<std::uint32_t>(static_cast<std::uint32_t>(n_groups));
  for (std::size_t g = 0; g < n_groups; ++g) {
    auto slice = rows.subspan(g * group_rows, std::min(group_rows, rows.size() - g * group_rows));
    DataStats st = DataStats::of(slice);
    footer.put<std::uint32_t>(static_cast<std::uint32_t>(slice.size()));
    footer.put<std::uint32_t>(slice.front().element_id);
    footer.put<std::uint32_t>(slice.back().element_id);
    footer.put<std::int64_t>(to_micros(st.min_ts));
    footer.put<std::int64_t>(to_micros(st.max_ts));
    footer.put<double>(st.min_value);
    footer.put<double>(st.max_value);
    const std::vector<std::uint8_t> raws[4] = {encode_elements(slice), encode_ts(slice), encode_values(slice),
                                               encode_status(slice)};
    for (const auto& raw : raws) {
      std::vector<std::uint8_t> stored = deflate_bytes(raw, options.compression_level);
      footer.put<std::uint64_t>(body.bytes.size());
      footer.put<std::uint32_t>(static_cast<std::uint32_t>(stored.size()));
      footer.put<std::uint32_t>(static_cast<std::uint32_t>(raw.size()));
      footer.put<std::uint32_t>(crc_of(stored));
      body.append(stored);
    }
  }
  std::uint32_t footer_len = static_cast<std::uint32_t>(footer.bytes.size());
  std::uint32_t footer_crc = crc_of(footer.bytes);
  body.append(footer.bytes);
  body.put<std::uint32_t>(footer_len);
  body.put<std::uint32_t>(footer_crc);
  body.bytes.insert(body.bytes.end(), kMagic, kMagic + 4);

  publish_file(write_temp_file(path, body.bytes), path);
  return DataStats::of(rows);
}

ColumnFileReader::ColumnFileReader(fs::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (!fs::exists(path_, ec)) throw ScanError(path_.string(), "partition file is missing");
  try {
    bytes_ = read_file_bytes(path_);
  } catch (const IoError& e) {
    throw ScanError(path_.string(), e.what());
  }
  const std::size_t trailer = 4 + 4 + 4;
  if (bytes_.size() < 8 + trailer || std::memcmp(bytes_.data(), kMagic, 4) != 0 ||
      std::memcmp(bytes_.data() + bytes_.size() - 4, kMagic, 4) != 0)
    throw ScanError(path_.string(), "not a column file (bad magic)");
  std::uint32_t version;
  std::memcpy(&version, bytes_.data() + 4, 4);
  if (version != kFormatVersion) throw ScanError(path_.string(), "unsupported format version " + std::to_string(version));
  std::uint32_t footer_len, footer_crc;
  std::memcpy(&footer_len, bytes_.data() + bytes_.size() - trailer, 4);
  std::memcpy(&footer_crc, bytes_.data() + bytes_.size() - trailer + 4, 4);
  if (footer_len > bytes_.size() - 8 - trailer) throw ScanError(path_.string(), "corrupt footer length");
  auto footer = std::span(bytes_).subspan(bytes_.size() - trailer - footer_len, footer_len);
  if (crc_of(footer) != footer_crc) throw ScanError(path_.string(), "footer checksum mismatch");

  ByteReader r(footer, path_);
  std::uint32_t n_groups = r.get<std::uint32_t>();
  if (static_cast<std::size_t>(n_groups) * kGroupInfoBytes + 4 != footer.size())
    throw ScanError(path_.string(), "footer size does not match group count");
  groups_.resize(n_groups);
  for (auto& g : groups_) {
    g.rows = r.get<std::uint32_t>();
    g.min_element = r.get<std::uint32_t>();
    g.max_element = r.get<std::uint32_t>();
    g.min_ts = r.get<std::int64_t>();
    g.max_ts = r.get<std::int64_t>();
    g.min_value = r.get<double>();
    g.max_value = r.get<double>();
    for (auto& c : g.chunks) {
      c.offset = r.get<std::uint64_t>();
      c.stored = r.get<std::uint32_t>();
      c.raw = r.get<std::uint32_t>();
      c.crc = r.get<std::uint32_t>();
      if (c.offset + c.stored > bytes_.size() - trailer - footer_len)
        throw ScanError(path_.string(), "column chunk out of bounds");
    }
  }
}

std::uint64_t ColumnFileReader::row_count() const {
  std::uint64_t n = 0;
  for (const auto& g : groups_) n += g.rows;
  return n;
}

std::vector<std::uint8_t> ColumnFileReader::inflate_chunk(const RowGroupInfo::Chunk& c) const {
  auto stored = std::span(bytes_).subspan(c.offset, c.stored);
  if (crc_of(stored) != c.crc) throw ScanError(path_.string(), "column chunk checksum mismatch");
  std::vector<std::uint8_t> raw(c.raw);
  uLongf len = c.raw;
  if (::uncompress(raw.data(), &len, stored.data(), c.stored) != Z_OK || len != c.raw)
    throw ScanError(path_.string(), "column chunk failed to decompress");
  return raw;
}

RecordBatch ColumnFileReader::read_group(std::size_t gi, Projection projection, bool need_values) const {
  const RowGroupInfo& g = groups_.at(gi);
  RecordBatch b;
  const std::size_t n = g.rows;

  {
    auto raw = inflate_chunk(g.chunks[kElement]);
    ByteReader r(raw, path_);
    b.element_id.reserve(n);
    while (!r.done()) {
      ElementId id = r.get<std::uint32_t>();
      std::uint32_t count = r.get<std::uint32_t>();
      b.element_id.insert(b.element_id.end(), count, id);
    }
    if (b.element_id.size() != n) throw ScanError(path_.string(), "element column length mismatch");
  }
  {
    auto raw = inflate_chunk(g.chunks[kTs]);
    ByteReader r(raw, path_);
    b.ts.resize(n);
    if (n > 0) {
      std::int64_t t = r.get<std::int64_t>();
      b.ts[0] = t;
      for (std::size_t i = 1; i < n; ++i) {
        t += unzigzag(r.get_varint());
        b.ts[i] = t;
      }
    }
    if (!r.done()) throw ScanError(path_.string(), "ts column length mismatch");
  }
  if (projection.has(Field::value) || need_values) {
    auto raw = inflate_chunk(g.chunks[kValue]);
    if (raw.size() != n * sizeof(double)) throw ScanError(path_.string(), "value column length mismatch");
    b.value.resize(n);
    std::memcpy(b.value.data(), raw.data(), raw.size());
  }
  if (projection.has(Field::status)) {
    auto raw = inflate_chunk(g.chunks[kStatus]);
    ByteReader r(raw, path_);
    auto bitmap = r.take((n + 7) / 8);
    b.status.assign(n, 0);
    b.status_valid.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (bitmap[i / 8] & (1u << (i % 8))) {
        b.status_valid[i] = 1;
        b.status[i] = r.get<std::int16_t>();
      }
    }
    if (!r.done()) throw ScanError(path_.string(), "status column length mismatch");
  }
  return b;
}

std::vector<EventRecord> ColumnFileReader::read_all() const {
  std::vector<EventRecord> out;
  out.reserve(row_count());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    RecordBatch b = read_group(g, Projection::all());
    for (std::size_t i = 0; i < b.size(); ++i) out.push_back(b.row(i));
  }
  return out;
}

}  // namespace dcs::storage
