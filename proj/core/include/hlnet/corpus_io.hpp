#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hlnet/generator.hpp"
#include "hlnet/scene.hpp"

namespace hlnet {

// One scene per line:
//   scene <w> <h> node <id> <x1> <y1> <x2> <y2> <class> ... rel <s> <o> <p> ...
// Floats use 6 decimals. Only geometry and labels are stored.
std::string serialize_scenes(const std::vector<SceneGraph>& scenes);
// Inverse of serialize_scenes. Features stay empty. Malformed records and a
// final line without its newline throw ParseError; empty text yields no scenes.
std::vector<SceneGraph> parse_scenes(std::string_view text);

struct LoadedCorpus {
  GenConfig config;
  Corpus corpus;
};

inline constexpr const char* kCorpusConfigFile = "corpus.cfg";

// Writes train.sg, val.sg, test.sg and the generator config echo.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus, const GenConfig& cfg);
// Reads the three splits and regenerates features from the config echo.
LoadedCorpus read_corpus(const std::filesystem::path& dir);

// FNV-1a over the config echo and the three split files, in a fixed order.
std::uint64_t corpus_hash(const std::filesystem::path& dir);

}  // namespace hlnet
