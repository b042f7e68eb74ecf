#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mlin/ops.hpp"

namespace mlin {

enum class InteractionOp { product, addition, concat };

/// Throws ConfigError for anything other than product/addition/concat.
InteractionOp parse_interaction_op(const std::string& name);
std::string to_string(InteractionOp op);

/// Architecture hyperparameters of a stack of MLI modules.
struct MliConfig {
  std::size_t d_model = 512;   // feature width d, shared by both modalities
  std::size_t k = 6;           // latent summaries per modality
  std::size_t heads = 16;      // aggregation attention heads H; must divide d_model
  std::size_t head_dim = 128;  // query/key width per head
  std::size_t stacks = 1;      // number of stacked MLI modules
  InteractionOp interaction = InteractionOp::product;
  /// Aggregation adds raw latent rows instead of projected values (no value
  /// or output projections). Requires heads == 1; kept for A/B comparison
  /// against the projected multi-head path.
  bool identity_values = false;
  double dropout_rate = 0.1;

  std::size_t pairs() const { return k * k; }
  std::size_t value_dim() const { return d_model / heads; }
  void validate() const;
};

struct AggregationHead {
  Tensor w_qr, b_qr;  // d×d_k, d_k      region queries
  Tensor w_qe, b_qe;  // d×d_k, d_k      word queries
  Tensor w_k, b_k;    // d×d_k, d_k      latent keys
  Tensor w_v, b_v;    // d×(d/H), d/H    latent values (projected mode only)
};

/// Learnable parameters of one MLI module.
struct MliLayerParams {
  Tensor w_r, b_r;  // k×d, k          visual summary logits
  Tensor w_e, b_e;  // k×d, k          word summary logits
  Tensor w_a, b_a;  // d×d or 2d×d, d  pair fusion
  Tensor w_c, b_c;  // d×d, d          per-pair channel transform
  Tensor w_p, b_p;  // k²×k², k²       cross-pair mixing
  std::vector<AggregationHead> heads;
  Tensor w_or, b_or;  // d×d, d        region output projection
  Tensor w_oe, b_oe;  // d×d, d        word output projection

  /// Weights uniform in ±1/√fan_in, biases zero.
  static MliLayerParams init(const MliConfig& cfg, Rng& rng);

  /// Visits every defined parameter in canonical order with a stable name
  /// under `prefix`. The order fixes checkpoint layout and optimizer slots.
  void visit(const std::string& prefix,
             const std::function<void(const std::string&, Tensor&)>& fn);
};

/// Closed-form learnable-scalar count of one MLI module; the audit target
/// for MliLayerParams.
std::size_t mli_layer_parameter_count(const MliConfig& cfg);

/// Attention captured during one MLI forward pass.
struct AttentionTrace {
  Tensor l_r;               // k×M summary weights over regions
  Tensor l_e;               // k×N summary weights over words
  std::vector<Tensor> u_r;  // per head: M×k² aggregation attention
  std::vector<Tensor> u_e;  // per head: N×k²
};

struct SummarizeResult {
  Tensor weights;  // L, k×n, rows stochastic over the n items
  Tensor summary;  // X̄ = L·X, k×d, rows are convex combinations of X rows
};

/// L = softmax over items of (W·Xᵀ + b), X̄ = L·X.
SummarizeResult summarize(Tape& tape, const Tensor& x, const Tensor& w,
                          const Tensor& b);

/// Fuses every (visual, word) summary pair into a k×k×d relation tensor:
/// A(i,j,:) = (R̄(i,:) ∘ Ē(j,:))·W_A + b_A with ∘ the configured operator
/// (concat fuses through a 2d→d map).
Tensor interact(Tape& tape, const Tensor& r_bar, const Tensor& e_bar,
                const MliLayerParams& params, InteractionOp op);

/// Flattens A to Ã (k²×d, row-major pair order) and runs the two parallel
/// transforms: per-pair channels (Ã·W_c + b_c) and cross-pair mixing
/// (W_p·Ã + b_p per pair row), summed into Â.
Tensor propagate(Tape& tape, const Tensor& a, const MliLayerParams& params);

enum class Modality { region, word };

/// Key-query attention from each of the n feature rows onto the k² latent
/// rows, residual-added: X_U = X + dropout(context). Per head, context is
/// attention-weighted projected values; heads concatenate back to width d
/// and pass through the modality's output projection (identity-values mode
/// aggregates Â directly). dropout_rng == nullptr disables dropout.
Tensor aggregate(Tape& tape, const Tensor& x, const Tensor& a_hat,
                 const MliLayerParams& params, const MliConfig& cfg,
                 Modality which, Rng* dropout_rng,
                 std::vector<Tensor>* attention_out = nullptr);

struct MliOutput {
  Tensor r_u;  // M×d, same shape as the region input
  Tensor e_u;  // N×d, same shape as the word input
  AttentionTrace trace;
};

/// One full MLI module: summarize both modalities, interact, propagate,
/// aggregate back into each modality. Output shapes equal input shapes, so
/// modules stack.
MliOutput mli_forward(Tape& tape, const Tensor& r, const Tensor& e,
                      const MliLayerParams& params, const MliConfig& cfg,
                      Rng* dropout_rng);

}  // namespace mlin
