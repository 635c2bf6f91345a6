#include "hlnet/nn.hpp"

#include <cmath>

#include "hlnet/errors.hpp"
#include "hlnet/ops.hpp"

namespace hlnet {

DiffArray ParamStore::add(const std::string& id, Shape shape, InitSpec init) {
  if (index_.contains(id)) throw ContractError("duplicate parameter id '" + id + "'");
  const std::size_t n = shape_size(shape);
  std::vector<double> values(n, 0.0);
  switch (init.kind) {
    case InitKind::Zeros:
      break;
    case InitKind::Explicit:
      if (init.values.size() != n) {
        throw DimensionError("parameter '" + id + "' of shape " + shape_string(shape) + " given " +
                             std::to_string(init.values.size()) + " initial values");
      }
      values = init.values;
      break;
    case InitKind::UniformFanIn: {
      std::size_t fan_in = 1, fan_out = 1;
      if (shape.size() >= 2) {
        fan_out = shape[0];
        fan_in = n / shape[0];
      } else if (shape.size() == 1) {
        fan_in = shape[0];
      }
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : values) v = dist(rng_);
      break;
    }
  }
  index_.emplace(id, params_.size());
  params_.push_back({id, DiffArray::leaf(std::move(shape), std::move(values), true), std::move(init)});
  return params_.back().array;
}

const ParamTensor* ParamStore::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &params_[it->second];
}

ParamTensor* ParamStore::find(const std::string& id) {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &params_[it->second];
}

std::size_t ParamStore::coordinate_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.array.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.array.zero_grad();
}

Linear make_linear(ParamStore& store, const std::string& id, std::size_t in, std::size_t out,
                   bool with_bias) {
  Linear l;
  l.weight = store.uniform(id + ".weight", {out, in});
  if (with_bias) l.bias = store.zeros(id + ".bias", {out});
  return l;
}

DiffArray linear(const Linear& p, const DiffArray& x) {
  DiffArray y = matmul_nt(x, p.weight);
  return p.bias.defined() ? add_row(y, p.bias) : y;
}

LayerNormParams make_layer_norm(ParamStore& store, const std::string& id, std::size_t width) {
  return {store.ones(id + ".gain", width), store.zeros(id + ".shift", {width})};
}

DiffArray layer_norm(const DiffArray& x, const LayerNormParams& p, double eps) {
  return layer_norm(x, p.gain, p.shift, eps);
}

FfnParams make_ffn(ParamStore& store, const std::string& id, std::size_t width, std::size_t hidden) {
  return {make_linear(store, id + ".hidden", width, hidden), make_linear(store, id + ".out", hidden, width)};
}

DiffArray ffn(const FfnParams& p, const DiffArray& x) {
  if (p.hidden.out_features() != p.out.in_features()) {
    throw DimensionError("ffn: hidden width " + std::to_string(p.hidden.out_features()) +
                         " feeds a layer expecting " + std::to_string(p.out.in_features()));
  }
  return linear(p.out, relu(linear(p.hidden, x)));
}

}  // namespace hlnet
