#include "hlnet/spatial.hpp"

#include <algorithm>
#include <vector>

#include "hlnet/errors.hpp"
#include "hlnet/ops.hpp"

namespace hlnet {

namespace {

constexpr std::size_t kConv1Out = 8;
constexpr std::size_t kConv2Out = 16;
constexpr std::size_t kKernel = 3;
constexpr std::size_t kSide1 = 7;  // (14 + 2 - 3) / 2 + 1
constexpr std::size_t kSide2 = 4;  // (7 + 2 - 3) / 2 + 1

// Input coordinate for output position `o` and kernel offset `k` at stride 2,
// padding 1; -1 when it falls in the padding.
long source_coord(std::size_t o, std::size_t k, std::size_t side) {
  const long c = static_cast<long>(2 * o + k) - 1;
  return (c < 0 || c >= static_cast<long>(side)) ? -1 : c;
}

}  // namespace

SpatialMaps spatial_binary_maps(const Box& a, const Box& b) {
  const Box u = union_box(a, b);
  const double cw = u.width() / static_cast<double>(kMapSide);
  const double ch = u.height() / static_cast<double>(kMapSide);
  SpatialMaps maps{};
  const Box* boxes[2] = {&a, &b};
  for (std::size_t c = 0; c < kMapChannels; ++c) {
    for (std::size_t r = 0; r < kMapSide; ++r) {
      const double y = u.y1 + (static_cast<double>(r) + 0.5) * ch;
      for (std::size_t col = 0; col < kMapSide; ++col) {
        const double x = u.x1 + (static_cast<double>(col) + 0.5) * cw;
        maps[(c * kMapSide + r) * kMapSide + col] = boxes[c]->contains_point(x, y) ? 1 : 0;
      }
    }
  }
  return maps;
}

SpatialEncoderParams make_spatial_encoder(ParamStore& store, const std::string& id, std::size_t width) {
  SpatialEncoderParams p;
  p.conv1_weight = store.uniform(id + ".conv1.weight", {kConv1Out, kMapChannels * kKernel * kKernel});
  p.conv1_bias = store.zeros(id + ".conv1.bias", {kConv1Out});
  p.conv2_weight = store.uniform(id + ".conv2.weight", {kConv2Out, kConv1Out * kKernel * kKernel});
  p.conv2_bias = store.zeros(id + ".conv2.bias", {kConv2Out});
  p.fc1 = make_linear(store, id + ".fc1", kConv2Out * kSide2 * kSide2, width);
  p.fc2 = make_linear(store, id + ".fc2", width, width);
  return p;
}

DiffArray encode_spatial(std::span<const double> values, const SpatialEncoderParams& p) {
  if (values.empty() || values.size() % kMapCells != 0) {
    throw DimensionError("encode_spatial: expected a multiple of " + std::to_string(kMapCells) +
                         " map values (2x14x14), got " + std::to_string(values.size()));
  }
  const std::size_t n = values.size() / kMapCells;
  const std::size_t k1 = kMapChannels * kKernel * kKernel;

  // conv1 patches straight from the input: rows (item, oy, ox), cols (ch, ky, kx).
  std::vector<double> patches(n * kSide1 * kSide1 * k1, 0.0);
  for (std::size_t item = 0; item < n; ++item) {
    const double* in = values.data() + item * kMapCells;
    for (std::size_t oy = 0; oy < kSide1; ++oy) {
      for (std::size_t ox = 0; ox < kSide1; ++ox) {
        double* row = patches.data() + ((item * kSide1 + oy) * kSide1 + ox) * k1;
        for (std::size_t c = 0; c < kMapChannels; ++c) {
          for (std::size_t ky = 0; ky < kKernel; ++ky) {
            const long y = source_coord(oy, ky, kMapSide);
            for (std::size_t kx = 0; kx < kKernel; ++kx) {
              const long x = source_coord(ox, kx, kMapSide);
              if (y < 0 || x < 0) continue;
              row[(c * kKernel + ky) * kKernel + kx] =
                  in[(c * kMapSide + static_cast<std::size_t>(y)) * kMapSide + static_cast<std::size_t>(x)];
            }
          }
        }
      }
    }
  }
  const DiffArray cols1 = DiffArray::constant({n * kSide1 * kSide1, k1}, std::move(patches));
  const DiffArray h1 = relu(add_row(matmul_nt(cols1, p.conv1_weight), p.conv1_bias));  // (n*49, 8)

  const std::size_t k2 = kConv1Out * kKernel * kKernel;
  std::vector<std::int64_t> index(n * kSide2 * kSide2 * k2, -1);
  for (std::size_t item = 0; item < n; ++item) {
    for (std::size_t oy = 0; oy < kSide2; ++oy) {
      for (std::size_t ox = 0; ox < kSide2; ++ox) {
        std::int64_t* row = index.data() + ((item * kSide2 + oy) * kSide2 + ox) * k2;
        for (std::size_t c = 0; c < kConv1Out; ++c) {
          for (std::size_t ky = 0; ky < kKernel; ++ky) {
            const long y = source_coord(oy, ky, kSide1);
            for (std::size_t kx = 0; kx < kKernel; ++kx) {
              const long x = source_coord(ox, kx, kSide1);
              if (y < 0 || x < 0) continue;
              const std::size_t pos = (item * kSide1 + static_cast<std::size_t>(y)) * kSide1 + static_cast<std::size_t>(x);
              row[(c * kKernel + ky) * kKernel + kx] = static_cast<std::int64_t>(pos * kConv1Out + c);
            }
          }
        }
      }
    }
  }
  const DiffArray cols2 = gather_flat(h1, index, {n * kSide2 * kSide2, k2});
  const DiffArray h2 = relu(add_row(matmul_nt(cols2, p.conv2_weight), p.conv2_bias));  // (n*16, 16)
  const DiffArray flat = reshape(h2, {n, kSide2 * kSide2 * kConv2Out});
  return linear(p.fc2, relu(linear(p.fc1, flat)));
}

DiffArray encode_spatial(std::span<const SpatialMaps> maps, const SpatialEncoderParams& p) {
  std::vector<double> values;
  values.reserve(maps.size() * kMapCells);
  for (const auto& m : maps) values.insert(values.end(), m.begin(), m.end());
  return encode_spatial(std::span<const double>(values), p);
}

}  // namespace hlnet
