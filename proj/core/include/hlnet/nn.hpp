#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "hlnet/diff_array.hpp"

namespace hlnet {

inline constexpr double kLayerNormEps = 1e-5;

enum class InitKind { UniformFanIn, Zeros, Explicit };

struct InitSpec {
  InitKind kind = InitKind::UniformFanIn;
  std::vector<double> values;  // only for Explicit

  static InitSpec uniform() { return {InitKind::UniformFanIn, {}}; }
  static InitSpec zeros() { return {InitKind::Zeros, {}}; }
  static InitSpec explicit_values(std::vector<double> v) { return {InitKind::Explicit, std::move(v)}; }
};

struct ParamTensor {
  std::string id;
  DiffArray array;
  InitSpec init;
};

// Owns every learnable array of a model, in registration order. Ids are unique.
// Uniform init draws from U(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
// where a 2-D (out, in) weight has fan_in = in, fan_out = out and a vector of
// length n has fan_in = n, fan_out = 1.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : rng_(seed) {}
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  DiffArray add(const std::string& id, Shape shape, InitSpec init);
  DiffArray uniform(const std::string& id, Shape shape) { return add(id, std::move(shape), InitSpec::uniform()); }
  DiffArray zeros(const std::string& id, Shape shape) { return add(id, std::move(shape), InitSpec::zeros()); }
  DiffArray ones(const std::string& id, std::size_t n) {
    return add(id, {n}, InitSpec::explicit_values(std::vector<double>(n, 1.0)));
  }

  const std::vector<ParamTensor>& params() const { return params_; }
  std::vector<ParamTensor>& params() { return params_; }
  const ParamTensor* find(const std::string& id) const;
  ParamTensor* find(const std::string& id);
  std::size_t coordinate_count() const;

  void zero_grad();

 private:
  std::mt19937_64 rng_;
  std::vector<ParamTensor> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Affine map y = W x + b with W of shape (out, in).
struct Linear {
  DiffArray weight;
  DiffArray bias;  // may be undefined

  std::size_t in_features() const { return weight.shape()[1]; }
  std::size_t out_features() const { return weight.shape()[0]; }
};

Linear make_linear(ParamStore& store, const std::string& id, std::size_t in, std::size_t out,
                   bool with_bias = true);
DiffArray linear(const Linear& p, const DiffArray& x);

struct LayerNormParams {
  DiffArray gain;
  DiffArray shift;
};

LayerNormParams make_layer_norm(ParamStore& store, const std::string& id, std::size_t width);
DiffArray layer_norm(const DiffArray& x, const LayerNormParams& p, double eps = kLayerNormEps);

// Linear -> ReLU -> Linear.
struct FfnParams {
  Linear hidden;
  Linear out;
};

FfnParams make_ffn(ParamStore& store, const std::string& id, std::size_t width, std::size_t hidden);
DiffArray ffn(const FfnParams& p, const DiffArray& x);

}  // namespace hlnet
