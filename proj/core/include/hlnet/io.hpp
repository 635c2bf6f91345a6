#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace hlnet {

// Whole-file read; FileError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t hash = 0xcbf29ce484222325ULL);

}  // namespace hlnet
