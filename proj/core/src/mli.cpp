#include "mlin/mli.hpp"

#include <cmath>

#include "mlin/error.hpp"

namespace mlin {

InteractionOp parse_interaction_op(const std::string& name) {
  if (name == "product") return InteractionOp::product;
  if (name == "addition") return InteractionOp::addition;
  if (name == "concat") return InteractionOp::concat;
  throw ConfigError("unknown interaction operator '" + name +
                    "' (expected product, addition or concat)");
}

std::string to_string(InteractionOp op) {
  switch (op) {
    case InteractionOp::product:
      return "product";
    case InteractionOp::addition:
      return "addition";
    case InteractionOp::concat:
      return "concat";
  }
  return "product";
}

void MliConfig::validate() const {
  if (d_model == 0 || k == 0 || heads == 0 || head_dim == 0 || stacks == 0) {
    throw ConfigError("d_model, k, heads, head_dim and stacks must be >= 1");
  }
  if (d_model % heads != 0) {
    throw ConfigError("d_model (" + std::to_string(d_model) +
                      ") must be divisible by heads (" +
                      std::to_string(heads) + ")");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
  if (identity_values && heads != 1) {
    throw ConfigError("identity-values aggregation requires heads == 1");
  }
}

namespace {

Tensor init_weight(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_values()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

MliLayerParams MliLayerParams::init(const MliConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t d = cfg.d_model;
  const std::size_t k = cfg.k;
  const std::size_t kk = cfg.pairs();
  const std::size_t dk = cfg.head_dim;
  const std::size_t dv = cfg.value_dim();
  const std::size_t fuse_in = cfg.interaction == InteractionOp::concat ? 2 * d : d;

  MliLayerParams p;
  p.w_r = init_weight({k, d}, d, rng);
  p.b_r = Tensor::zeros({k});
  p.w_e = init_weight({k, d}, d, rng);
  p.b_e = Tensor::zeros({k});
  p.w_a = init_weight({fuse_in, d}, fuse_in, rng);
  p.b_a = Tensor::zeros({d});
  p.w_c = init_weight({d, d}, d, rng);
  p.b_c = Tensor::zeros({d});
  p.w_p = init_weight({kk, kk}, kk, rng);
  p.b_p = Tensor::zeros({kk});
  p.heads.resize(cfg.heads);
  for (AggregationHead& h : p.heads) {
    h.w_qr = init_weight({d, dk}, d, rng);
    h.b_qr = Tensor::zeros({dk});
    h.w_qe = init_weight({d, dk}, d, rng);
    h.b_qe = Tensor::zeros({dk});
    h.w_k = init_weight({d, dk}, d, rng);
    h.b_k = Tensor::zeros({dk});
    if (!cfg.identity_values) {
      h.w_v = init_weight({d, dv}, d, rng);
      h.b_v = Tensor::zeros({dv});
    }
  }
  if (!cfg.identity_values) {
    p.w_or = init_weight({d, d}, d, rng);
    p.b_or = Tensor::zeros({d});
    p.w_oe = init_weight({d, d}, d, rng);
    p.b_oe = Tensor::zeros({d});
  }
  return p;
}

void MliLayerParams::visit(
    const std::string& prefix,
    const std::function<void(const std::string&, Tensor&)>& fn) {
  auto emit = [&](const std::string& name, Tensor& t) {
    if (t.defined()) fn(prefix + name, t);
  };
  emit("w_r", w_r);
  emit("b_r", b_r);
  emit("w_e", w_e);
  emit("b_e", b_e);
  emit("w_a", w_a);
  emit("b_a", b_a);
  emit("w_c", w_c);
  emit("b_c", b_c);
  emit("w_p", w_p);
  emit("b_p", b_p);
  for (std::size_t h = 0; h < heads.size(); ++h) {
    const std::string hp = "head" + std::to_string(h) + ".";
    emit(hp + "w_qr", heads[h].w_qr);
    emit(hp + "b_qr", heads[h].b_qr);
    emit(hp + "w_qe", heads[h].w_qe);
    emit(hp + "b_qe", heads[h].b_qe);
    emit(hp + "w_k", heads[h].w_k);
    emit(hp + "b_k", heads[h].b_k);
    emit(hp + "w_v", heads[h].w_v);
    emit(hp + "b_v", heads[h].b_v);
  }
  emit("w_or", w_or);
  emit("b_or", b_or);
  emit("w_oe", w_oe);
  emit("b_oe", b_oe);
}

std::size_t mli_layer_parameter_count(const MliConfig& cfg) {
  const std::size_t d = cfg.d_model;
  const std::size_t k = cfg.k;
  const std::size_t kk = cfg.pairs();
  const std::size_t dk = cfg.head_dim;
  const std::size_t fuse_in = cfg.interaction == InteractionOp::concat ? 2 * d : d;

  std::size_t count = 2 * (k * d + k);   // summary logits
  count += fuse_in * d + d;              // pair fusion
  count += d * d + d;                    // channel transform
  count += kk * kk + kk;                 // cross-pair mixing
  count += cfg.heads * 3 * (d * dk + dk);  // region/word queries + keys
  if (!cfg.identity_values) {
    count += cfg.heads * (d * cfg.value_dim() + cfg.value_dim());  // values
    count += 2 * (d * d + d);            // output projections
  }
  return count;
}

SummarizeResult summarize(Tape& tape, const Tensor& x, const Tensor& w,
                          const Tensor& b) {
  if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.cols()) {
    throw ShapeError("summarize: feature width mismatch, x=" +
                     shape_str(x.shape()) + " w=" + shape_str(w.shape()));
  }
  // (W·Xᵀ + b) computed transposed so the bias lands on the summary axis.
  Tensor logits = transpose(tape, linear(tape, x, transpose(tape, w), b));
  SummarizeResult out;
  out.weights = softmax_rows(tape, logits);  // k×n, each row over the n items
  out.summary = matmul(tape, out.weights, x);
  return out;
}

Tensor interact(Tape& tape, const Tensor& r_bar, const Tensor& e_bar,
                const MliLayerParams& params, InteractionOp op) {
  if (r_bar.shape() != e_bar.shape()) {
    throw ShapeError("interact: summaries disagree: " +
                     shape_str(r_bar.shape()) + " vs " +
                     shape_str(e_bar.shape()));
  }
  const std::size_t k = r_bar.rows();
  const std::size_t d = r_bar.cols();
  // Row (i*k + j) of the pair matrix fuses R̄(i,:) with Ē(j,:).
  Tensor lhs = repeat_rows(tape, r_bar, k);
  Tensor rhs = tile_rows(tape, e_bar, k);
  Tensor fused;
  switch (op) {
    case InteractionOp::product:
      fused = mul(tape, lhs, rhs);
      break;
    case InteractionOp::addition:
      fused = add(tape, lhs, rhs);
      break;
    case InteractionOp::concat:
      fused = concat_cols(tape, lhs, rhs);
      break;
  }
  Tensor a = linear(tape, fused, params.w_a, params.b_a);
  return reshape(tape, a, {k, k, d});
}

Tensor propagate(Tape& tape, const Tensor& a, const MliLayerParams& params) {
  if (a.rank() != 3 || a.dim(0) != a.dim(1)) {
    throw ShapeError("propagate: expected a k×k×d tensor, got " +
                     shape_str(a.shape()));
  }
  const std::size_t kk = a.dim(0) * a.dim(1);
  const std::size_t d = a.dim(2);
  Tensor flat = reshape(tape, a, {kk, d});
  Tensor channel = linear(tape, flat, params.w_c, params.b_c);
  // W_p·Ã + b_p mixes the pair rows; computed transposed so the bias lands
  // on the pair axis.
  Tensor pair = transpose(
      tape, linear(tape, transpose(tape, flat), transpose(tape, params.w_p),
                   params.b_p));
  return add(tape, channel, pair);
}

Tensor aggregate(Tape& tape, const Tensor& x, const Tensor& a_hat,
                 const MliLayerParams& params, const MliConfig& cfg,
                 Modality which, Rng* dropout_rng,
                 std::vector<Tensor>* attention_out) {
  if (x.rank() != 2 || x.cols() != cfg.d_model) {
    throw ShapeError("aggregate: feature width must equal d_model, got " +
                     shape_str(x.shape()));
  }
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim));
  std::vector<Tensor> contexts;
  contexts.reserve(params.heads.size());
  for (const AggregationHead& head : params.heads) {
    const Tensor& w_q = which == Modality::region ? head.w_qr : head.w_qe;
    const Tensor& b_q = which == Modality::region ? head.b_qr : head.b_qe;
    Tensor queries = linear(tape, x, w_q, b_q);
    Tensor keys = linear(tape, a_hat, head.w_k, head.b_k);
    Tensor attn = softmax_rows(
        tape, scale(tape, matmul(tape, queries, transpose(tape, keys)),
                    inv_sqrt_dk));
    if (attention_out) attention_out->push_back(attn);
    Tensor values =
        cfg.identity_values ? a_hat : linear(tape, a_hat, head.w_v, head.b_v);
    contexts.push_back(matmul(tape, attn, values));
  }
  Tensor context = contexts[0];
  for (std::size_t h = 1; h < contexts.size(); ++h) {
    context = concat_cols(tape, context, contexts[h]);
  }
  if (!cfg.identity_values) {
    const Tensor& w_o = which == Modality::region ? params.w_or : params.w_oe;
    const Tensor& b_o = which == Modality::region ? params.b_or : params.b_oe;
    context = linear(tape, context, w_o, b_o);
  }
  if (dropout_rng != nullptr && cfg.dropout_rate > 0.0) {
    context = dropout(tape, context, cfg.dropout_rate, *dropout_rng);
  }
  return add(tape, x, context);
}

MliOutput mli_forward(Tape& tape, const Tensor& r, const Tensor& e,
                      const MliLayerParams& params, const MliConfig& cfg,
                      Rng* dropout_rng) {
  SummarizeResult sr = summarize(tape, r, params.w_r, params.b_r);
  SummarizeResult se = summarize(tape, e, params.w_e, params.b_e);
  Tensor a = interact(tape, sr.summary, se.summary, params, cfg.interaction);
  Tensor a_hat = propagate(tape, a, params);
  MliOutput out;
  out.trace.l_r = sr.weights;
  out.trace.l_e = se.weights;
  out.r_u = aggregate(tape, r, a_hat, params, cfg, Modality::region,
                      dropout_rng, &out.trace.u_r);
  out.e_u = aggregate(tape, e, a_hat, params, cfg, Modality::word, dropout_rng,
                      &out.trace.u_e);
  return out;
}

}  // namespace mlin
