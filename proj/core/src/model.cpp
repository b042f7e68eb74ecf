#include "mlin/model.hpp"

#include "mlin/error.hpp"

namespace mlin {

namespace {

Tensor init_weight(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_values()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

MlinModel MlinModel::init(const MliConfig& cfg, std::size_t d_in,
                          std::size_t n_classes, Rng& rng) {
  cfg.validate();
  if (d_in == 0 || n_classes < 2) {
    throw ConfigError("need d_in >= 1 and at least two answer classes");
  }
  MlinModel m;
  m.cfg = cfg;
  m.d_in = d_in;
  m.n_classes = n_classes;
  m.w_proj_r = init_weight({d_in, cfg.d_model}, d_in, rng);
  m.b_proj_r = Tensor::zeros({cfg.d_model});
  m.w_proj_e = init_weight({d_in, cfg.d_model}, d_in, rng);
  m.b_proj_e = Tensor::zeros({cfg.d_model});
  m.layers.reserve(cfg.stacks);
  for (std::size_t s = 0; s < cfg.stacks; ++s) {
    m.layers.push_back(MliLayerParams::init(cfg, rng));
  }
  m.w_cls = init_weight({cfg.d_model, n_classes}, cfg.d_model, rng);
  m.b_cls = Tensor::zeros({n_classes});
  return m;
}

void MlinModel::visit(
    const std::function<void(const std::string&, Tensor&)>& fn) {
  fn("input_r.w", w_proj_r);
  fn("input_r.b", b_proj_r);
  fn("input_e.w", w_proj_e);
  fn("input_e.b", b_proj_e);
  for (std::size_t s = 0; s < layers.size(); ++s) {
    layers[s].visit("layer" + std::to_string(s) + ".", fn);
  }
  fn("classifier.w", w_cls);
  fn("classifier.b", b_cls);
}

std::vector<std::pair<std::string, Tensor>> MlinModel::named_parameters() {
  std::vector<std::pair<std::string, Tensor>> out;
  visit([&](const std::string& name, Tensor& t) { out.emplace_back(name, t); });
  return out;
}

std::vector<Tensor> MlinModel::parameters() {
  std::vector<Tensor> out;
  visit([&](const std::string&, Tensor& t) { out.push_back(t); });
  return out;
}

std::size_t MlinModel::parameter_count() {
  std::size_t count = 0;
  visit([&](const std::string&, Tensor& t) { count += t.size(); });
  return count;
}

std::size_t model_parameter_count(const MliConfig& cfg, std::size_t d_in,
                                  std::size_t n_classes) {
  std::size_t count = 2 * (d_in * cfg.d_model + cfg.d_model);
  count += cfg.stacks * mli_layer_parameter_count(cfg);
  count += cfg.d_model * n_classes + n_classes;
  return count;
}

StackResult apply_stack(Tape& tape, const MlinModel& model, const Tensor& r0,
                        const Tensor& e0, Rng* dropout_rng) {
  StackResult out;
  out.r = r0;
  out.e = e0;
  out.traces.reserve(model.layers.size());
  for (const MliLayerParams& layer : model.layers) {
    MliOutput step =
        mli_forward(tape, out.r, out.e, layer, model.cfg, dropout_rng);
    out.r = step.r_u;
    out.e = step.e_u;
    out.traces.push_back(std::move(step.trace));
  }
  return out;
}

ForwardResult forward(Tape& tape, const MlinModel& model, const Tensor& r_in,
                      const Tensor& e_in, Rng* dropout_rng) {
  if (r_in.rank() != 2 || r_in.cols() != model.d_in || e_in.rank() != 2 ||
      e_in.cols() != model.d_in) {
    throw ConfigError("input feature width must be " +
                      std::to_string(model.d_in) + ", got regions " +
                      shape_str(r_in.shape()) + " and words " +
                      shape_str(e_in.shape()));
  }
  Tensor r0 = linear(tape, r_in, model.w_proj_r, model.b_proj_r);
  Tensor e0 = linear(tape, e_in, model.w_proj_e, model.b_proj_e);
  StackResult stack = apply_stack(tape, model, r0, e0, dropout_rng);
  Tensor r_pool = mean_rows(tape, stack.r);
  Tensor e_pool = mean_rows(tape, stack.e);
  Tensor fused = mul(tape, r_pool, e_pool);
  if (dropout_rng != nullptr && model.cfg.dropout_rate > 0.0) {
    fused = dropout(tape, fused, model.cfg.dropout_rate, *dropout_rng);
  }
  Tensor logits =
      linear(tape, reshape(tape, fused, {1, model.cfg.d_model}), model.w_cls,
             model.b_cls);
  ForwardResult out;
  out.logits = reshape(tape, logits, {model.n_classes});
  out.traces = std::move(stack.traces);
  return out;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace mlin
