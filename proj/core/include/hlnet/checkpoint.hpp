#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hlnet/model.hpp"
#include "hlnet/trainer.hpp"

namespace hlnet {

inline constexpr const char* kCheckpointTag = "hlnet-checkpoint v1";

// Text checkpoint: version tag, TrainConfig as key=value lines, the seen rows
// of the frequency bias, then each parameter as id, shape and row-major
// values. Doubles use shortest round-trip formatting, so a save/load cycle is
// bit exact.
std::string serialize_checkpoint(const TrainConfig& cfg, const Model& model);

struct Checkpoint {
  TrainConfig config;
  Model model;
};

// Throws ParseError on malformed text and ConfigError when the stored
// parameters do not fit the stored config.
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const TrainConfig& cfg, const Model& model);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hlnet
