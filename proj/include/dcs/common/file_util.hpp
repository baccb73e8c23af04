#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcs {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

/// Writes `data` to `<path>.tmp`, flushes it to disk and leaves it there.
/// Pair with publish_file() to make it visible under `path`.
std::filesystem::path write_temp_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);
std::filesystem::path write_temp_file(const std::filesystem::path& path, std::string_view text);

/// Atomically renames `tmp` onto `path` and syncs the parent directory.
void publish_file(const std::filesystem::path& tmp, const std::filesystem::path& path);

inline void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  publish_file(write_temp_file(path, text), path);
}

}  // namespace dcs
