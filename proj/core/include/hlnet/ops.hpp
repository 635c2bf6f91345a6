#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hlnet/diff_array.hpp"

// Differentiable primitives. Every function records its backward rule when
// gradient mode is on and at least one input requires a gradient.
namespace hlnet {

// (m, k) x (k, n) -> (m, n).
DiffArray matmul(const DiffArray& a, const DiffArray& b);
// Rows of x (last dim k) times w^T for w of shape (n, k). Output keeps the
// leading dims of x and replaces the last one with n.
DiffArray matmul_nt(const DiffArray& x, const DiffArray& w);
// Rows of x dotted with vector w (length = x.cols()); output has x.rows() entries.
DiffArray matvec(const DiffArray& x, const DiffArray& w);

DiffArray add(const DiffArray& a, const DiffArray& b);
DiffArray sub(const DiffArray& a, const DiffArray& b);
DiffArray mul(const DiffArray& a, const DiffArray& b);
// Adds a length-cols vector to every row.
DiffArray add_row(const DiffArray& a, const DiffArray& row);
DiffArray scale(const DiffArray& a, double factor);
// weights[index] * a.
DiffArray scale_by_entry(const DiffArray& a, const DiffArray& weights, std::size_t index);
// Row r multiplied by w[r]; w has a.rows() entries.
DiffArray row_scale(const DiffArray& a, const DiffArray& w);
// sum_u weights[u] * xs[u]; all xs share one shape.
DiffArray weighted_sum(std::span<const DiffArray> xs, const DiffArray& weights);

DiffArray relu(const DiffArray& x);
DiffArray tanh_act(const DiffArray& x);

// Softmax along the last axis, max-subtracted.
DiffArray softmax(const DiffArray& x);
// Softmax of a flat vector within groups: entries sharing a segment id are
// normalized together.
DiffArray segment_softmax(const DiffArray& x, std::span<const std::uint32_t> segments,
                          std::size_t num_segments);
// Zero-mean unit-variance rows (population variance), then affine.
DiffArray layer_norm(const DiffArray& x, const DiffArray& gain, const DiffArray& shift,
                     double eps);

// Output row r = x row index[r]; index -1 yields a zero row.
DiffArray gather_rows(const DiffArray& x, std::span<const std::int32_t> index);
// Sums rows of x into num_segments buckets.
DiffArray segment_sum(const DiffArray& x, std::span<const std::uint32_t> segments,
                      std::size_t num_segments);
// Flat gather with zero fill for index -1; used for im2col.
DiffArray gather_flat(const DiffArray& x, std::span<const std::int64_t> index, Shape shape);
DiffArray concat_cols(std::span<const DiffArray> parts);
DiffArray reshape(const DiffArray& x, Shape shape);

DiffArray sum(const DiffArray& x);
DiffArray mean(const DiffArray& x);

// Mean cross-entropy of softmax(logits row r) against class targets[r].
DiffArray cross_entropy(const DiffArray& logits, std::span<const int> targets);

inline constexpr double kSignProbClamp = 1e-7;
// Mean BCE of sign predictions s in (-1, 1) against labels in {-1, 1}, using
// p = (s + 1) / 2 clamped to [1e-7, 1 - 1e-7].
DiffArray sign_bce(const DiffArray& predictions, std::span<const int> labels);

}  // namespace hlnet
