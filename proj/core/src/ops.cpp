#include "hlnet/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "hlnet/errors.hpp"

namespace hlnet {

namespace {

using Node = DiffArray::Node;
using NodePtr = std::shared_ptr<Node>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require_same_shape(const DiffArray& a, const DiffArray& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
}

Shape with_last(const Shape& s, std::size_t last) {
  Shape out = s.empty() ? Shape{} : s;
  if (out.empty()) {
    out.push_back(last);
  } else {
    out.back() = last;
  }
  return out;
}

}  // namespace

DiffArray matmul(const DiffArray& a, const DiffArray& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.shape()[1] != b.shape()[0]) {
    throw DimensionError("matmul: cannot multiply " + shape_string(a.shape()) + " by " +
                         shape_string(b.shape()));
  }
  const auto m = static_cast<Eigen::Index>(a.shape()[0]);
  const auto k = static_cast<Eigen::Index>(a.shape()[1]);
  const auto n = static_cast<Eigen::Index>(b.shape()[1]);
  std::vector<double> out(static_cast<std::size_t>(m * n));
  MapMat(out.data(), m, n).noalias() =
      ConstMapMat(a.values().data(), m, k) * ConstMapMat(b.values().data(), k, n);
  return DiffArray::make_result(
      {a.shape()[0], b.shape()[1]}, std::move(out), {a.node_ptr(), b.node_ptr()},
      [pa = a.node(), pb = b.node(), m, k, n](Node& self) {
        ConstMapMat g(self.grad.data(), m, n);
        if (pa->requires_grad) {
          MapMat(pa->grad.data(), m, k).noalias() += g * ConstMapMat(pb->value.data(), k, n).transpose();
        }
        if (pb->requires_grad) {
          MapMat(pb->grad.data(), k, n).noalias() += ConstMapMat(pa->value.data(), m, k).transpose() * g;
        }
      });
}

DiffArray matmul_nt(const DiffArray& x, const DiffArray& w) {
  if (w.ndim() != 2 || x.ndim() == 0 || x.cols() != w.shape()[1]) {
    throw DimensionError("linear map: weight " + shape_string(w.shape()) +
                         " does not accept input " + shape_string(x.shape()));
  }
  const auto m = static_cast<Eigen::Index>(x.rows());
  const auto k = static_cast<Eigen::Index>(x.cols());
  const auto n = static_cast<Eigen::Index>(w.shape()[0]);
  std::vector<double> out(static_cast<std::size_t>(m * n));
  MapMat(out.data(), m, n).noalias() =
      ConstMapMat(x.values().data(), m, k) * ConstMapMat(w.values().data(), n, k).transpose();
  return DiffArray::make_result(
      with_last(x.shape(), static_cast<std::size_t>(n)), std::move(out), {x.node_ptr(), w.node_ptr()},
      [px = x.node(), pw = w.node(), m, k, n](Node& self) {
        ConstMapMat g(self.grad.data(), m, n);
        if (px->requires_grad) {
          MapMat(px->grad.data(), m, k).noalias() += g * ConstMapMat(pw->value.data(), n, k);
        }
        if (pw->requires_grad) {
          MapMat(pw->grad.data(), n, k).noalias() += g.transpose() * ConstMapMat(px->value.data(), m, k);
        }
      });
}

DiffArray matvec(const DiffArray& x, const DiffArray& w) {
  if (w.size() != x.cols()) {
    throw DimensionError("matvec: vector of length " + std::to_string(w.size()) +
                         " against rows of " + shape_string(x.shape()));
  }
  const std::size_t m = x.rows(), k = x.cols();
  std::vector<double> out(m, 0.0);
  const auto xv = x.values();
  const auto wv = w.values();
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < k; ++c) acc += xv[r * k + c] * wv[c];
    out[r] = acc;
  }
  return DiffArray::make_result({m}, std::move(out), {x.node_ptr(), w.node_ptr()},
                                [px = x.node(), pw = w.node(), m, k](Node& self) {
                                  for (std::size_t r = 0; r < m; ++r) {
                                    const double g = self.grad[r];
                                    if (g == 0.0) continue;
                                    if (px->requires_grad) {
                                      for (std::size_t c = 0; c < k; ++c) px->grad[r * k + c] += g * pw->value[c];
                                    }
                                    if (pw->requires_grad) {
                                      for (std::size_t c = 0; c < k; ++c) pw->grad[c] += g * px->value[r * k + c];
                                    }
                                  }
                                });
}

DiffArray add(const DiffArray& a, const DiffArray& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return DiffArray::make_result(a.shape(), std::move(out), {a.node_ptr(), b.node_ptr()},
                                [pa = a.node(), pb = b.node()](Node& self) {
                                  for (Node* p : {pa, pb}) {
                                    if (!p->requires_grad) continue;
                                    for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
                                  }
                                });
}

DiffArray sub(const DiffArray& a, const DiffArray& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return DiffArray::make_result(a.shape(), std::move(out), {a.node_ptr(), b.node_ptr()},
                                [pa = a.node(), pb = b.node()](Node& self) {
                                  const std::size_t n = self.grad.size();
                                  if (pa->requires_grad) {
                                    for (std::size_t i = 0; i < n; ++i) pa->grad[i] += self.grad[i];
                                  }
                                  if (pb->requires_grad) {
                                    for (std::size_t i = 0; i < n; ++i) pb->grad[i] -= self.grad[i];
                                  }
                                });
}

DiffArray mul(const DiffArray& a, const DiffArray& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return DiffArray::make_result(a.shape(), std::move(out), {a.node_ptr(), b.node_ptr()},
                                [pa = a.node(), pb = b.node()](Node& self) {
                                  const std::size_t n = self.grad.size();
                                  if (pa->requires_grad) {
                                    for (std::size_t i = 0; i < n; ++i) pa->grad[i] += self.grad[i] * pb->value[i];
                                  }
                                  if (pb->requires_grad) {
                                    for (std::size_t i = 0; i < n; ++i) pb->grad[i] += self.grad[i] * pa->value[i];
                                  }
                                });
}

DiffArray add_row(const DiffArray& a, const DiffArray& row) {
  const std::size_t c = a.cols();
  if (row.size() != c) {
    throw DimensionError("add_row: bias of length " + std::to_string(row.size()) +
                         " against rows of " + shape_string(a.shape()));
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + row[i % c];
  return DiffArray::make_result(a.shape(), std::move(out), {a.node_ptr(), row.node_ptr()},
                                [pa = a.node(), pr = row.node(), c](Node& self) {
                                  const std::size_t n = self.grad.size();
                                  if (pa->requires_grad) {
                                    for (std::size_t i = 0; i < n; ++i) pa->grad[i] += self.grad[i];
                                  }
                                  if (pr->requires_grad) {
                                    for (std::size_t i = 0; i < n; ++i) pr->grad[i % c] += self.grad[i];
                                  }
                                });
}

DiffArray scale(const DiffArray& a, double factor) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return DiffArray::make_result(a.shape(), std::move(out), {a.node_ptr()},
                                [pa = a.node(), factor](Node& self) {
                                  for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                    pa->grad[i] += self.grad[i] * factor;
                                  }
                                });
}

DiffArray scale_by_entry(const DiffArray& a, const DiffArray& weights, std::size_t index) {
  if (index >= weights.size()) {
    throw DimensionError("scale_by_entry: index " + std::to_string(index) + " out of " +
                         shape_string(weights.shape()));
  }
  const double w = weights[index];
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * w;
  return DiffArray::make_result(a.shape(), std::move(out), {a.node_ptr(), weights.node_ptr()},
                                [pa = a.node(), pw = weights.node(), index](Node& self) {
                                  const double wv = pw->value[index];
                                  double acc = 0.0;
                                  for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                    if (pa->requires_grad) pa->grad[i] += self.grad[i] * wv;
                                    acc += self.grad[i] * pa->value[i];
                                  }
                                  if (pw->requires_grad) pw->grad[index] += acc;
                                });
}

DiffArray row_scale(const DiffArray& a, const DiffArray& w) {
  const std::size_t m = a.rows(), c = a.cols();
  if (w.size() != m) {
    throw DimensionError("row_scale: " + std::to_string(w.size()) + " weights for " +
                         std::to_string(m) + " rows");
  }
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t k = 0; k < c; ++k) out[r * c + k] = a[r * c + k] * w[r];
  }
  return DiffArray::make_result(a.shape(), std::move(out), {a.node_ptr(), w.node_ptr()},
                                [pa = a.node(), pw = w.node(), m, c](Node& self) {
                                  for (std::size_t r = 0; r < m; ++r) {
                                    double acc = 0.0;
                                    for (std::size_t k = 0; k < c; ++k) {
                                      const double g = self.grad[r * c + k];
                                      if (pa->requires_grad) pa->grad[r * c + k] += g * pw->value[r];
                                      acc += g * pa->value[r * c + k];
                                    }
                                    if (pw->requires_grad) pw->grad[r] += acc;
                                  }
                                });
}

DiffArray weighted_sum(std::span<const DiffArray> xs, const DiffArray& weights) {
  if (xs.empty() || xs.size() != weights.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(xs.size()) + " arrays for " +
                         std::to_string(weights.size()) + " weights");
  }
  const Shape& shape = xs.front().shape();
  std::vector<double> out(xs.front().size(), 0.0);
  std::vector<NodePtr> parents{weights.node_ptr()};
  std::vector<Node*> raw;
  for (std::size_t u = 0; u < xs.size(); ++u) {
    if (xs[u].shape() != shape) {
      throw DimensionError("weighted_sum: shape " + shape_string(xs[u].shape()) + " vs " +
                           shape_string(shape));
    }
    const double w = weights[u];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * xs[u][i];
    parents.push_back(xs[u].node_ptr());
    raw.push_back(xs[u].node());
  }
  return DiffArray::make_result(shape, std::move(out), std::move(parents),
                                [pw = weights.node(), raw](Node& self) {
                                  for (std::size_t u = 0; u < raw.size(); ++u) {
                                    Node* px = raw[u];
                                    const double w = pw->value[u];
                                    double acc = 0.0;
                                    for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                      if (px->requires_grad) px->grad[i] += w * self.grad[i];
                                      acc += self.grad[i] * px->value[i];
                                    }
                                    if (pw->requires_grad) pw->grad[u] += acc;
                                  }
                                });
}

DiffArray relu(const DiffArray& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return DiffArray::make_result(x.shape(), std::move(out), {x.node_ptr()}, [px = x.node()](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (px->value[i] > 0.0) px->grad[i] += self.grad[i];
    }
  });
}

DiffArray tanh_act(const DiffArray& x) {
  std::vector<double> out(x.size());
  // std::tanh rounds to exactly +-1 past |x| ~ 19; keep outputs inside (-1, 1).
  const double bound = std::nextafter(1.0, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(std::tanh(x[i]), -bound, bound);
  return DiffArray::make_result(x.shape(), std::move(out), {x.node_ptr()}, [px = x.node()](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double t = self.value[i];
      px->grad[i] += self.grad[i] * (1.0 - t * t);
    }
  });
}

DiffArray softmax(const DiffArray& x) {
  const std::size_t c = x.cols();
  if (c == 0 || x.size() == 0) throw std::domain_error("softmax over an empty axis");
  const std::size_t m = x.rows();
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < m; ++r) {
    const double* in = x.values().data() + r * c;
    double* o = out.data() + r * c;
    const double mx = *std::max_element(in, in + c);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += (o[k] = std::exp(in[k] - mx));
    for (std::size_t k = 0; k < c; ++k) o[k] /= z;
  }
  return DiffArray::make_result(x.shape(), std::move(out), {x.node_ptr()},
                                [px = x.node(), m, c](Node& self) {
                                  for (std::size_t r = 0; r < m; ++r) {
                                    const double* y = self.value.data() + r * c;
                                    const double* g = self.grad.data() + r * c;
                                    double dot = 0.0;
                                    for (std::size_t k = 0; k < c; ++k) dot += g[k] * y[k];
                                    for (std::size_t k = 0; k < c; ++k) px->grad[r * c + k] += y[k] * (g[k] - dot);
                                  }
                                });
}

DiffArray segment_softmax(const DiffArray& x, std::span<const std::uint32_t> segments,
                          std::size_t num_segments) {
  if (segments.size() != x.size()) {
    throw DimensionError("segment_softmax: " + std::to_string(segments.size()) + " segment ids for " +
                         std::to_string(x.size()) + " values");
  }
  std::vector<double> mx(num_segments, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (segments[i] >= num_segments) throw DimensionError("segment_softmax: segment id out of range");
    mx[segments[i]] = std::max(mx[segments[i]], x[i]);
  }
  std::vector<double> z(num_segments, 0.0);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[segments[i]] += (out[i] = std::exp(x[i] - mx[segments[i]]));
  for (std::size_t i = 0; i < x.size(); ++i) out[i] /= z[segments[i]];
  std::vector<std::uint32_t> seg(segments.begin(), segments.end());
  return DiffArray::make_result(x.shape(), std::move(out), {x.node_ptr()},
                                [px = x.node(), seg = std::move(seg), num_segments](Node& self) {
                                  std::vector<double> dot(num_segments, 0.0);
                                  for (std::size_t i = 0; i < seg.size(); ++i) dot[seg[i]] += self.grad[i] * self.value[i];
                                  for (std::size_t i = 0; i < seg.size(); ++i) {
                                    px->grad[i] += self.value[i] * (self.grad[i] - dot[seg[i]]);
                                  }
                                });
}

DiffArray layer_norm(const DiffArray& x, const DiffArray& gain, const DiffArray& shift, double eps) {
  const std::size_t c = x.cols();
  if (gain.size() != c || shift.size() != c) {
    throw DimensionError("layer_norm: affine of length " + std::to_string(gain.size()) + "/" +
                         std::to_string(shift.size()) + " for rows of " + shape_string(x.shape()));
  }
  const std::size_t m = x.rows();
  std::vector<double> normalized(x.size());
  std::vector<double> inv_std(m);
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < m; ++r) {
    const double* in = x.values().data() + r * c;
    double mu = 0.0;
    for (std::size_t k = 0; k < c; ++k) mu += in[k];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t k = 0; k < c; ++k) var += (in[k] - mu) * (in[k] - mu);
    var /= static_cast<double>(c);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t k = 0; k < c; ++k) {
      const double y = (in[k] - mu) * inv_std[r];
      normalized[r * c + k] = y;
      out[r * c + k] = y * gain[k] + shift[k];
    }
  }
  return DiffArray::make_result(
      x.shape(), std::move(out), {x.node_ptr(), gain.node_ptr(), shift.node_ptr()},
      [px = x.node(), pg = gain.node(), ps = shift.node(), normalized = std::move(normalized),
       inv_std = std::move(inv_std), m, c](Node& self) {
        std::vector<double> gy(c);
        for (std::size_t r = 0; r < m; ++r) {
          const double* g = self.grad.data() + r * c;
          const double* y = normalized.data() + r * c;
          double mean_gy = 0.0, mean_gyy = 0.0;
          for (std::size_t k = 0; k < c; ++k) {
            gy[k] = g[k] * pg->value[k];
            mean_gy += gy[k];
            mean_gyy += gy[k] * y[k];
            if (pg->requires_grad) pg->grad[k] += g[k] * y[k];
            if (ps->requires_grad) ps->grad[k] += g[k];
          }
          if (!px->requires_grad) continue;
          mean_gy /= static_cast<double>(c);
          mean_gyy /= static_cast<double>(c);
          for (std::size_t k = 0; k < c; ++k) {
            px->grad[r * c + k] += inv_std[r] * (gy[k] - mean_gy - y[k] * mean_gyy);
          }
        }
      });
}

DiffArray gather_rows(const DiffArray& x, std::span<const std::int32_t> index) {
  const std::size_t c = x.cols(), m = x.rows();
  std::vector<double> out(index.size() * c, 0.0);
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto src = index[r];
    if (src < 0) continue;
    if (static_cast<std::size_t>(src) >= m) {
      throw DimensionError("gather_rows: row " + std::to_string(src) + " of " + std::to_string(m));
    }
    std::copy_n(x.values().data() + static_cast<std::size_t>(src) * c, c, out.data() + r * c);
  }
  std::vector<std::int32_t> idx(index.begin(), index.end());
  return DiffArray::make_result({index.size(), c}, std::move(out), {x.node_ptr()},
                                [px = x.node(), idx = std::move(idx), c](Node& self) {
                                  for (std::size_t r = 0; r < idx.size(); ++r) {
                                    if (idx[r] < 0) continue;
                                    double* dst = px->grad.data() + static_cast<std::size_t>(idx[r]) * c;
                                    const double* g = self.grad.data() + r * c;
                                    for (std::size_t k = 0; k < c; ++k) dst[k] += g[k];
                                  }
                                });
}

DiffArray segment_sum(const DiffArray& x, std::span<const std::uint32_t> segments,
                      std::size_t num_segments) {
  const std::size_t c = x.cols(), m = x.rows();
  if (segments.size() != m) {
    throw DimensionError("segment_sum: " + std::to_string(segments.size()) + " segment ids for " +
                         std::to_string(m) + " rows");
  }
  std::vector<double> out(num_segments * c, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (segments[r] >= num_segments) throw DimensionError("segment_sum: segment id out of range");
    const double* in = x.values().data() + r * c;
    double* o = out.data() + segments[r] * c;
    for (std::size_t k = 0; k < c; ++k) o[k] += in[k];
  }
  std::vector<std::uint32_t> seg(segments.begin(), segments.end());
  return DiffArray::make_result({num_segments, c}, std::move(out), {x.node_ptr()},
                                [px = x.node(), seg = std::move(seg), c](Node& self) {
                                  for (std::size_t r = 0; r < seg.size(); ++r) {
                                    const double* g = self.grad.data() + seg[r] * c;
                                    double* dst = px->grad.data() + r * c;
                                    for (std::size_t k = 0; k < c; ++k) dst[k] += g[k];
                                  }
                                });
}

DiffArray gather_flat(const DiffArray& x, std::span<const std::int64_t> index, Shape shape) {
  if (shape_size(shape) != index.size()) {
    throw DimensionError("gather_flat: " + std::to_string(index.size()) + " indices for shape " +
                         shape_string(shape));
  }
  std::vector<double> out(index.size(), 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0) continue;
    if (static_cast<std::size_t>(index[i]) >= x.size()) throw DimensionError("gather_flat: index out of range");
    out[i] = x[static_cast<std::size_t>(index[i])];
  }
  std::vector<std::int64_t> idx(index.begin(), index.end());
  return DiffArray::make_result(std::move(shape), std::move(out), {x.node_ptr()},
                                [px = x.node(), idx = std::move(idx)](Node& self) {
                                  for (std::size_t i = 0; i < idx.size(); ++i) {
                                    if (idx[i] >= 0) px->grad[static_cast<std::size_t>(idx[i])] += self.grad[i];
                                  }
                                });
}

DiffArray concat_cols(std::span<const DiffArray> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t m = parts.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  std::vector<NodePtr> parents;
  std::vector<Node*> raw;
  for (const auto& p : parts) {
    if (p.rows() != m) {
      throw DimensionError("concat_cols: row counts " + std::to_string(p.rows()) + " and " +
                           std::to_string(m) + " differ");
    }
    widths.push_back(p.cols());
    total += p.cols();
    parents.push_back(p.node_ptr());
    raw.push_back(p.node());
  }
  std::vector<double> out(m * total);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::size_t w = widths[i];
    for (std::size_t r = 0; r < m; ++r) {
      std::copy_n(parts[i].values().data() + r * w, w, out.data() + r * total + offset);
    }
    offset += w;
  }
  Shape shape = parts.front().ndim() <= 1 && m == 1 ? Shape{total} : Shape{m, total};
  return DiffArray::make_result(std::move(shape), std::move(out), std::move(parents),
                                [raw, widths, m, total](Node& self) {
                                  std::size_t off = 0;
                                  for (std::size_t i = 0; i < raw.size(); ++i) {
                                    const std::size_t w = widths[i];
                                    if (raw[i]->requires_grad) {
                                      for (std::size_t r = 0; r < m; ++r) {
                                        for (std::size_t k = 0; k < w; ++k) {
                                          raw[i]->grad[r * w + k] += self.grad[r * total + off + k];
                                        }
                                      }
                                    }
                                    off += w;
                                  }
                                });
}

DiffArray reshape(const DiffArray& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: " + shape_string(x.shape()) + " to " + shape_string(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return DiffArray::make_result(std::move(shape), std::move(out), {x.node_ptr()}, [px = x.node()](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) px->grad[i] += self.grad[i];
  });
}

DiffArray sum(const DiffArray& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  return DiffArray::make_result({}, {acc}, {x.node_ptr()}, [px = x.node()](Node& self) {
    for (auto& g : px->grad) g += self.grad[0];
  });
}

DiffArray mean(const DiffArray& x) {
  if (x.size() == 0) throw std::domain_error("mean of an empty array");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

DiffArray cross_entropy(const DiffArray& logits, std::span<const int> targets) {
  const std::size_t m = logits.rows(), c = logits.cols();
  if (targets.size() != m || m == 0) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(m) + " rows");
  }
  std::vector<double> probs(logits.size());
  double loss = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= c) {
      throw ContractError("cross_entropy: target " + std::to_string(targets[r]) + " outside [0, " +
                          std::to_string(c) + ")");
    }
    const double* in = logits.values().data() + r * c;
    double* p = probs.data() + r * c;
    const double mx = *std::max_element(in, in + c);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += (p[k] = std::exp(in[k] - mx));
    for (std::size_t k = 0; k < c; ++k) p[k] /= z;
    loss += -(in[targets[r]] - mx - std::log(z));
  }
  loss /= static_cast<double>(m);
  std::vector<int> tgt(targets.begin(), targets.end());
  return DiffArray::make_result({}, {loss}, {logits.node_ptr()},
                                [pl = logits.node(), probs = std::move(probs), tgt = std::move(tgt), m,
                                 c](Node& self) {
                                  const double g = self.grad[0] / static_cast<double>(m);
                                  for (std::size_t r = 0; r < m; ++r) {
                                    for (std::size_t k = 0; k < c; ++k) {
                                      const double onehot = static_cast<int>(k) == tgt[r] ? 1.0 : 0.0;
                                      pl->grad[r * c + k] += g * (probs[r * c + k] - onehot);
                                    }
                                  }
                                });
}

DiffArray sign_bce(const DiffArray& predictions, std::span<const int> labels) {
  const std::size_t n = predictions.size();
  if (labels.size() != n || n == 0) {
    throw DimensionError("sign_bce: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(n) + " predictions");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 1 && labels[i] != -1) {
      throw ContractError("sign_bce: label " + std::to_string(labels[i]) + " is not -1 or 1");
    }
    const double p = std::clamp((predictions[i] + 1.0) / 2.0, kSignProbClamp, 1.0 - kSignProbClamp);
    loss += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  loss /= static_cast<double>(n);
  std::vector<int> lab(labels.begin(), labels.end());
  return DiffArray::make_result({}, {loss}, {predictions.node_ptr()},
                                [pp = predictions.node(), lab = std::move(lab), n](Node& self) {
                                  const double g = self.grad[0] / static_cast<double>(n);
                                  for (std::size_t i = 0; i < n; ++i) {
                                    const double raw = (pp->value[i] + 1.0) / 2.0;
                                    if (raw <= kSignProbClamp || raw >= 1.0 - kSignProbClamp) continue;
                                    // d/ds of -log p is -1/(2p); of -log(1-p) is 1/(2(1-p)).
                                    pp->grad[i] += lab[i] == 1 ? -g / (2.0 * raw) : g / (2.0 * (1.0 - raw));
                                  }
                                });
}

}  // namespace hlnet
