#include "hlnet_cli/manifest.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "hlnet/errors.hpp"
#include "hlnet/io.hpp"

namespace hlnet::cli {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  const nlohmann::json j = {
      {"command", m.command},
      {"config", m.config},
      {"seed", m.seed},
      {"corpus_hash", m.corpus_hash},
      {"checkpoint", m.checkpoint},
      {"metrics", m.metrics},
      {"wall_clock_seconds", m.wall_clock_seconds},
  };
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.corpus_hash = j.at("corpus_hash").get<std::string>();
    m.checkpoint = j.at("checkpoint").get<std::string>();
    m.metrics = j.at("metrics").get<std::string>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 1);
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) { write_file_atomic(path, manifest_json(m)); }

}  // namespace hlnet::cli
