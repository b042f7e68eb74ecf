#pragma once

#include "mlin/rng.hpp"
#include "mlin/tape.hpp"
#include "mlin/tensor.hpp"

namespace mlin {

/// Differentiable tensor operations. Each function validates shapes, computes
/// the forward value into a fresh tensor and records its backward rule on the
/// tape. There is no implicit broadcasting anywhere: the only broadcasts are
/// the explicit materializations repeat_rows / tile_rows and the per-row bias
/// inside linear.

enum class EwOp { mul, add };

/// a[p×q] · b[q×r] -> [p×r]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

/// x[p×q] · w[q×r] + b[r] broadcast across rows -> [p×r]
Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b);

/// Rowwise softmax, stabilized by subtracting the row maximum.
Tensor softmax_rows(Tape& tape, const Tensor& x);

/// Columnwise softmax, stabilized by subtracting the column maximum.
Tensor softmax_cols(Tape& tape, const Tensor& x);

/// Pointwise product or sum of two identically shaped tensors.
Tensor elementwise(Tape& tape, const Tensor& a, const Tensor& b, EwOp op);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);

Tensor scale(Tape& tape, const Tensor& x, double factor);

Tensor transpose(Tape& tape, const Tensor& x);

/// Same data, new extents; element count must be preserved.
Tensor reshape(Tape& tape, const Tensor& x, Shape target);

/// [p×qa], [p×qb] -> [p×(qa+qb)]
Tensor concat_cols(Tape& tape, const Tensor& a, const Tensor& b);

/// Arithmetic mean over rows: [p×q] -> [q].
Tensor mean_rows(Tape& tape, const Tensor& x);

/// Each row repeated `times` times consecutively: row (i*times + t) = x[i].
Tensor repeat_rows(Tape& tape, const Tensor& x, std::size_t times);

/// The whole row block repeated `times` times: row (t*n + i) = x[i].
Tensor tile_rows(Tape& tape, const Tensor& x, std::size_t times);

/// Inverted dropout: kept activations are divided by the keep probability,
/// so evaluation (rate 0) is a no-op. rate must lie in [0, 1); the mask is
/// drawn from the explicit stream `rng`.
Tensor dropout(Tape& tape, const Tensor& x, double rate, Rng& rng);

/// -log softmax(logits)[label] for a rank-1 logits vector; scalar output.
Tensor cross_entropy(Tape& tape, const Tensor& logits, std::size_t label);

}  // namespace mlin
