#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace hlnet::cli {

// Record of one command run, written next to its outputs.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;  // resolved key=value settings
  std::uint64_t seed = 0;
  std::string corpus_hash;  // 16 hex digits, empty when no corpus was read
  std::string checkpoint;
  std::string metrics;
  double wall_clock_seconds = 0.0;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string manifest_json(const RunManifest& m);
// Throws ParseError on malformed JSON or missing fields.
RunManifest parse_manifest(std::string_view text);
// Atomic: the file appears complete or not at all.
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

std::string hex64(std::uint64_t v);

}  // namespace hlnet::cli
