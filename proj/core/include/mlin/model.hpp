#pragma once

#include <span>
#include <utility>

#include "mlin/dataset.hpp"
#include "mlin/mli.hpp"

namespace mlin {

/// The full network: affine input projections into d_model, a stack of MLI
/// modules, mean-pooled elementwise fusion of the two modalities and a
/// linear classifier. Word inputs are one-hot token rows on the synthetic
/// task, so the word input projection doubles as the token embedding table.
struct MlinModel {
  MliConfig cfg;
  std::size_t d_in = 16;
  std::size_t n_classes = 12;

  Tensor w_proj_r, b_proj_r;  // d_in×d, d
  Tensor w_proj_e, b_proj_e;  // d_in×d, d
  std::vector<MliLayerParams> layers;  // cfg.stacks entries
  Tensor w_cls, b_cls;  // d×C, C

  static MlinModel init(const MliConfig& cfg, std::size_t d_in,
                        std::size_t n_classes, Rng& rng);

  void visit(const std::function<void(const std::string&, Tensor&)>& fn);
  std::vector<std::pair<std::string, Tensor>> named_parameters();
  std::vector<Tensor> parameters();
  /// Actual learnable-scalar count; audited against model_parameter_count.
  std::size_t parameter_count();
};

/// Closed-form parameter count for a model of this configuration.
std::size_t model_parameter_count(const MliConfig& cfg, std::size_t d_in,
                                  std::size_t n_classes);

struct StackResult {
  Tensor r, e;
  std::vector<AttentionTrace> traces;
};

/// Runs the stacked MLI modules over already-projected features.
StackResult apply_stack(Tape& tape, const MlinModel& model, const Tensor& r0,
                        const Tensor& e0, Rng* dropout_rng);

struct ForwardResult {
  Tensor logits;  // rank-1, length C
  std::vector<AttentionTrace> traces;
};

/// Full forward pass from raw features to answer logits. dropout_rng ==
/// nullptr runs in evaluation mode (dropout disabled everywhere).
ForwardResult forward(Tape& tape, const MlinModel& model, const Tensor& r_in,
                      const Tensor& e_in, Rng* dropout_rng);

std::size_t argmax(std::span<const double> values);

}  // namespace mlin
