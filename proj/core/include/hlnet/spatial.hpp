#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "hlnet/diff_array.hpp"
#include "hlnet/nn.hpp"
#include "hlnet/scene.hpp"

namespace hlnet {

inline constexpr std::size_t kMapSide = 14;
inline constexpr std::size_t kMapChannels = 2;
inline constexpr std::size_t kMapCells = kMapChannels * kMapSide * kMapSide;

// Two binary channels laid out [channel][row][col]. The lattice spans the tight
// union of the two boxes; a cell is set when its center lies in the channel's
// box (closed interval).
using SpatialMaps = std::array<std::uint8_t, kMapCells>;

SpatialMaps spatial_binary_maps(const Box& a, const Box& b);

inline std::uint8_t map_cell(const SpatialMaps& m, std::size_t channel, std::size_t row, std::size_t col) {
  return m[(channel * kMapSide + row) * kMapSide + col];
}

// conv 3x3/2 (2->8) -> ReLU -> conv 3x3/2 (8->16) -> ReLU -> FC -> ReLU -> FC.
struct SpatialEncoderParams {
  DiffArray conv1_weight;  // (8, 2*3*3)
  DiffArray conv1_bias;    // (8)
  DiffArray conv2_weight;  // (16, 8*3*3)
  DiffArray conv2_bias;    // (16)
  Linear fc1;              // 256 -> d
  Linear fc2;              // d -> d

  std::size_t width() const { return fc2.out_features(); }
};

SpatialEncoderParams make_spatial_encoder(ParamStore& store, const std::string& id, std::size_t width);

// Encodes a batch of map pairs; returns (maps.size(), d).
DiffArray encode_spatial(std::span<const SpatialMaps> maps, const SpatialEncoderParams& p);

// Same, from raw values; `values` must hold a multiple of 2*14*14 entries.
DiffArray encode_spatial(std::span<const double> values, const SpatialEncoderParams& p);

}  // namespace hlnet
