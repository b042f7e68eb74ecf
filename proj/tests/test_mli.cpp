#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "mlin/error.hpp"
#include "mlin/mli.hpp"
#include "testing/gradient_check.hpp"
#include "testing/naive_reference.hpp"

namespace mlin {
namespace {

namespace naive = testing::naive;
using testing::check_gradients;
using testing::random_tensor;

Tensor identity_matrix(std::size_t n) {
  Tensor t = Tensor::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      out.at(i, j) = x.at(perm[i], j);
    }
  }
  return out;
}

void zero_tensor(Tensor& t) {
  if (!t.defined()) return;
  for (double& v : t.mutable_values()) v = 0.0;
}

void zero_aggregation_outputs(MliLayerParams& p) {
  for (AggregationHead& h : p.heads) {
    zero_tensor(h.w_v);
    zero_tensor(h.b_v);
  }
  zero_tensor(p.w_or);
  zero_tensor(p.b_or);
  zero_tensor(p.w_oe);
  zero_tensor(p.b_oe);
}

double mat_diff(const naive::Mat& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      worst = std::max(worst, std::fabs(a[i][j] - b.at(i, j)));
    }
  }
  return worst;
}

MliConfig tiny_config(std::size_t d, std::size_t k, std::size_t heads,
                      std::size_t head_dim) {
  MliConfig cfg;
  cfg.d_model = d;
  cfg.k = k;
  cfg.heads = heads;
  cfg.head_dim = head_dim;
  cfg.dropout_rate = 0.0;
  return cfg;
}

TEST(MliConfig, Validation) {
  MliConfig cfg = tiny_config(8, 2, 3, 4);
  EXPECT_THROW(cfg.validate(), ConfigError);  // 8 % 3 != 0
  cfg.heads = 2;
  cfg.validate();
  cfg.identity_values = true;
  EXPECT_THROW(cfg.validate(), ConfigError);  // identity needs one head
  cfg.heads = 1;
  cfg.validate();
  EXPECT_THROW(parse_interaction_op("hadamard"), ConfigError);
  EXPECT_EQ(parse_interaction_op("concat"), InteractionOp::concat);
}

TEST(Summarize, UniformWeightsGiveRowMean) {
  Rng rng(21);
  Tape tape;
  Tensor x = random_tensor({5, 4}, rng);
  SummarizeResult s =
      summarize(tape, x, Tensor::zeros({1, 4}), Tensor::zeros({1}));
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_NEAR(s.weights.at(0, j), 0.2, 1e-15);
  }
  Tensor mean = mean_rows(tape, x);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(s.summary.at(0, c), mean.at(c), 1e-15);
  }
}

TEST(Summarize, CommutesWithItemPermutation) {
  Rng rng(22);
  Tape tape;
  Tensor x = random_tensor({6, 4}, rng);
  Tensor w = random_tensor({3, 4}, rng);
  Tensor b = random_tensor({3}, rng);
  SummarizeResult base = summarize(tape, x, w, b);

  std::vector<std::size_t> perm = {4, 0, 5, 2, 1, 3};
  SummarizeResult permuted = summarize(tape, permute_rows(x, perm), w, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_NEAR(permuted.weights.at(i, j), base.weights.at(i, perm[j]),
                  1e-12);
    }
  }
  EXPECT_LE(max_abs_diff(permuted.summary, base.summary), 1e-12);
}

TEST(Summarize, MatchesNaiveLoop) {
  Rng rng(23);
  Tape tape;
  Tensor x = random_tensor({4, 8}, rng);
  Tensor w = random_tensor({2, 8}, rng);
  Tensor b = random_tensor({2}, rng);
  SummarizeResult got = summarize(tape, x, w, b);
  auto [l, xbar] = naive::summarize(naive::from_tensor(x),
                                    naive::from_tensor(w),
                                    naive::vec_from_tensor(b));
  EXPECT_LT(mat_diff(l, got.weights), 1e-12);
  EXPECT_LT(mat_diff(xbar, got.summary), 1e-12);
}

TEST(Summarize, MoreSummariesThanItemsIsLegal) {
  Rng rng(24);
  Tape tape;
  SummarizeResult s = summarize(tape, random_tensor({2, 4}, rng),
                                random_tensor({6, 4}, rng),
                                random_tensor({6}, rng));
  EXPECT_EQ(s.summary.shape(), (Shape{6, 4}));
}

TEST(Interact, ProductWithOnesIsIdentity) {
  Rng rng(25);
  MliConfig cfg = tiny_config(3, 2, 1, 2);
  Rng init_rng(1);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  p.w_a = identity_matrix(3);
  zero_tensor(p.b_a);
  Tape tape;
  Tensor r_bar = random_tensor({2, 3}, rng);
  Tensor a = interact(tape, r_bar, Tensor::ones({2, 3}), p,
                      InteractionOp::product);
  ASSERT_EQ(a.shape(), (Shape{2, 2, 3}));
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_NEAR(a.at((i * 2 + j) * 3 + c), r_bar.at(i, c), 1e-15);
      }
    }
  }
}

TEST(Interact, AdditionWithZerosIsIdentity) {
  Rng rng(26);
  MliConfig cfg = tiny_config(3, 2, 1, 2);
  cfg.interaction = InteractionOp::addition;
  Rng init_rng(1);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  p.w_a = identity_matrix(3);
  zero_tensor(p.b_a);
  Tape tape;
  Tensor r_bar = random_tensor({2, 3}, rng);
  Tensor a = interact(tape, r_bar, Tensor::zeros({2, 3}), p,
                      InteractionOp::addition);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_NEAR(a.at((i * 2 + j) * 3 + c), r_bar.at(i, c), 1e-15);
      }
    }
  }
}

TEST(Interact, MatchesNaiveLoopForAllOperators) {
  Rng rng(27);
  for (InteractionOp op : {InteractionOp::product, InteractionOp::addition,
                           InteractionOp::concat}) {
    MliConfig cfg = tiny_config(3, 2, 1, 2);
    cfg.interaction = op;
    Rng init_rng(5);
    MliLayerParams p = MliLayerParams::init(cfg, init_rng);
    Tape tape;
    Tensor r_bar = random_tensor({2, 3}, rng);
    Tensor e_bar = random_tensor({2, 3}, rng);
    Tensor a = interact(tape, r_bar, e_bar, p, op);
    Tensor flat = reshape(tape, a, {4, 3});
    naive::Mat expect = naive::interact(
        naive::from_tensor(r_bar), naive::from_tensor(e_bar), op,
        naive::from_tensor(p.w_a), naive::vec_from_tensor(p.b_a));
    EXPECT_LT(mat_diff(expect, flat), 1e-12) << to_string(op);
  }
}

TEST(Propagate, IdentityChannelPath) {
  Rng rng(28);
  MliConfig cfg = tiny_config(3, 2, 1, 2);
  Rng init_rng(2);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  p.w_c = identity_matrix(3);
  zero_tensor(p.b_c);
  zero_tensor(p.w_p);
  zero_tensor(p.b_p);
  Tape tape;
  Tensor flat = random_tensor({4, 3}, rng);
  Tensor a = reshape(tape, flat, {2, 2, 3});
  Tensor a_hat = propagate(tape, a, p);
  EXPECT_LE(max_abs_diff(a_hat, flat), 1e-15);
}

TEST(Propagate, PermutationMatrixPermutesPairs) {
  Rng rng(29);
  MliConfig cfg = tiny_config(3, 2, 1, 2);
  Rng init_rng(3);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  zero_tensor(p.w_c);
  zero_tensor(p.b_c);
  zero_tensor(p.b_p);
  // W_p = cyclic permutation of the four pair rows.
  zero_tensor(p.w_p);
  const std::size_t cycle[4] = {1, 2, 3, 0};
  for (std::size_t i = 0; i < 4; ++i) p.w_p.at(i, cycle[i]) = 1.0;
  Tape tape;
  Tensor flat = random_tensor({4, 3}, rng);
  Tensor a_hat = propagate(tape, reshape(tape, flat, {2, 2, 3}), p);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(a_hat.at(i, c), flat.at(cycle[i], c), 1e-15);
    }
  }
}

TEST(Propagate, MatchesNaiveLoop) {
  Rng rng(30);
  MliConfig cfg = tiny_config(3, 2, 1, 2);
  Rng init_rng(4);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  Tape tape;
  Tensor flat = random_tensor({4, 3}, rng);
  Tensor a_hat = propagate(tape, reshape(tape, flat, {2, 2, 3}), p);
  naive::Mat expect = naive::propagate(
      naive::from_tensor(flat), naive::from_tensor(p.w_c),
      naive::vec_from_tensor(p.b_c), naive::from_tensor(p.w_p),
      naive::vec_from_tensor(p.b_p));
  EXPECT_LT(mat_diff(expect, a_hat), 1e-12);
}

TEST(Aggregate, ZeroValueProjectionsGiveResidualIdentity) {
  Rng rng(31);
  MliConfig cfg = tiny_config(8, 2, 2, 4);
  Rng init_rng(6);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  zero_aggregation_outputs(p);
  Tape tape;
  Tensor x = random_tensor({5, 8}, rng);
  Tensor a_hat = random_tensor({4, 8}, rng);
  Tensor out = aggregate(tape, x, a_hat, p, cfg, Modality::region, nullptr);
  EXPECT_EQ(max_abs_diff(out, x), 0.0);  // bitwise
}

TEST(Aggregate, SingleLatentDegeneratesToBroadcast) {
  Rng rng(32);
  MliConfig cfg = tiny_config(6, 1, 2, 4);  // k² = 1
  Rng init_rng(7);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  Tape tape;
  Tensor x = random_tensor({4, 6}, rng);
  Tensor a_hat = random_tensor({1, 6}, rng);
  std::vector<Tensor> attention;
  Tensor out =
      aggregate(tape, x, a_hat, p, cfg, Modality::word, nullptr, &attention);
  ASSERT_EQ(attention.size(), 2u);
  for (const Tensor& u : attention) {
    for (double v : u.values()) EXPECT_DOUBLE_EQ(v, 1.0);
  }
  // Every row receives the same single projected latent row.
  for (std::size_t i = 1; i < 4; ++i) {
    for (std::size_t c = 0; c < 6; ++c) {
      EXPECT_NEAR(out.at(i, c) - x.at(i, c), out.at(0, c) - x.at(0, c),
                  1e-14);
    }
  }
}

TEST(Aggregate, MatchesNaiveLoopSingleHead) {
  Rng rng(33);
  MliConfig cfg = tiny_config(4, 2, 1, 3);
  Rng init_rng(8);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  Tape tape;
  Tensor x = random_tensor({3, 4}, rng);
  Tensor a_hat = random_tensor({4, 4}, rng);
  Tensor out = aggregate(tape, x, a_hat, p, cfg, Modality::region, nullptr);
  naive::Mat expect =
      naive::aggregate(naive::from_tensor(x), naive::from_tensor(a_hat),
                       naive::layer_from(p, cfg), cfg, true);
  EXPECT_LT(mat_diff(expect, out), 1e-12);
}

TEST(MliForward, ZeroUpdateIsIdentity) {
  Rng rng(34);
  MliConfig cfg = tiny_config(8, 2, 2, 4);
  Rng init_rng(9);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  zero_aggregation_outputs(p);
  Tape tape;
  Tensor r = random_tensor({5, 8}, rng);
  Tensor e = random_tensor({3, 8}, rng);
  MliOutput out = mli_forward(tape, r, e, p, cfg, nullptr);
  EXPECT_EQ(max_abs_diff(out.r_u, r), 0.0);
  EXPECT_EQ(max_abs_diff(out.e_u, e), 0.0);
}

TEST(MliForward, RegionPermutationEquivariance) {
  Rng rng(35);
  MliConfig cfg = tiny_config(8, 3, 2, 4);
  Rng init_rng(10);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  Tape tape;
  Tensor r = random_tensor({6, 8}, rng);
  Tensor e = random_tensor({4, 8}, rng);
  MliOutput base = mli_forward(tape, r, e, p, cfg, nullptr);

  std::vector<std::size_t> perm = {3, 1, 5, 0, 4, 2};
  MliOutput permuted =
      mli_forward(tape, permute_rows(r, perm), e, p, cfg, nullptr);
  EXPECT_LE(max_abs_diff(permuted.r_u, permute_rows(base.r_u, perm)), 1e-12);
  EXPECT_LE(max_abs_diff(permuted.e_u, base.e_u), 1e-12);
}

TEST(MliForward, ShapesArePreservedForStacking) {
  Rng rng(36);
  MliConfig cfg = tiny_config(8, 2, 2, 4);
  Rng init_rng(11);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  for (auto [m, n] : {std::pair<std::size_t, std::size_t>{1, 1},
                      {1, 7},
                      {9, 1},
                      {5, 4}}) {
    Tape tape;
    Tensor r = random_tensor({m, 8}, rng);
    Tensor e = random_tensor({n, 8}, rng);
    MliOutput out = mli_forward(tape, r, e, p, cfg, nullptr);
    EXPECT_EQ(out.r_u.shape(), r.shape());
    EXPECT_EQ(out.e_u.shape(), e.shape());
    ASSERT_EQ(out.trace.u_r.size(), 2u);
    EXPECT_EQ(out.trace.l_r.shape(), (Shape{2, m}));
    EXPECT_EQ(out.trace.u_r[0].shape(), (Shape{m, 4}));
  }
}

TEST(MliForward, MatchesNaiveLoopEndToEnd) {
  Rng rng(37);
  MliConfig cfg = tiny_config(8, 2, 2, 4);
  Rng init_rng(12);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  Tape tape;
  Tensor r = random_tensor({5, 8}, rng);
  Tensor e = random_tensor({3, 8}, rng);
  MliOutput out = mli_forward(tape, r, e, p, cfg, nullptr);
  auto [r_u, e_u] = naive::mli_forward(naive::from_tensor(r),
                                       naive::from_tensor(e),
                                       naive::layer_from(p, cfg), cfg);
  EXPECT_LT(mat_diff(r_u, out.r_u), 1e-10);
  EXPECT_LT(mat_diff(e_u, out.e_u), 1e-10);
}

TEST(MliForward, AttentionRowsAreStochastic) {
  Rng rng(38);
  MliConfig cfg = tiny_config(8, 3, 2, 4);
  Rng init_rng(13);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  Tape tape;
  MliOutput out = mli_forward(tape, random_tensor({6, 8}, rng),
                              random_tensor({4, 8}, rng), p, cfg, nullptr);
  for (const std::vector<Tensor>& per_modality : {out.trace.u_r,
                                                  out.trace.u_e}) {
    for (const Tensor& u : per_modality) {
      for (std::size_t i = 0; i < u.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < u.cols(); ++j) {
          EXPECT_GE(u.at(i, j), 0.0);
          sum += u.at(i, j);
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(MliLayerParams, CountMatchesClosedForm) {
  for (MliConfig cfg :
       {tiny_config(8, 2, 2, 4), tiny_config(12, 3, 4, 5)}) {
    for (InteractionOp op : {InteractionOp::product, InteractionOp::concat}) {
      cfg.interaction = op;
      Rng rng(14);
      MliLayerParams p = MliLayerParams::init(cfg, rng);
      std::size_t actual = 0;
      p.visit("", [&](const std::string&, Tensor& t) { actual += t.size(); });
      EXPECT_EQ(actual, mli_layer_parameter_count(cfg)) << to_string(op);
    }
  }
  MliConfig id_cfg = tiny_config(8, 2, 1, 4);
  id_cfg.identity_values = true;
  Rng rng(15);
  MliLayerParams p = MliLayerParams::init(id_cfg, rng);
  std::size_t actual = 0;
  p.visit("", [&](const std::string&, Tensor& t) { actual += t.size(); });
  EXPECT_EQ(actual, mli_layer_parameter_count(id_cfg));
  // Default full-scale configuration: d=512, k=6, H=16, d_k=128, d/H=32.
  EXPECT_EQ(mli_layer_parameter_count(MliConfig{}),
            2u * (6 * 512 + 6) + (512 * 512 + 512) + (512 * 512 + 512) +
                (36 * 36 + 36) + 16u * 3 * (512 * 128 + 128) +
                16u * (512 * 32 + 32) + 2u * (512 * 512 + 512));
}

TEST(MliForward, IdentityValuesModeMatchesNaive) {
  Rng rng(39);
  MliConfig cfg = tiny_config(6, 2, 1, 4);
  cfg.identity_values = true;
  Rng init_rng(16);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  Tape tape;
  Tensor r = random_tensor({4, 6}, rng);
  Tensor e = random_tensor({3, 6}, rng);
  MliOutput out = mli_forward(tape, r, e, p, cfg, nullptr);
  auto [r_u, e_u] = naive::mli_forward(naive::from_tensor(r),
                                       naive::from_tensor(e),
                                       naive::layer_from(p, cfg), cfg);
  EXPECT_LT(mat_diff(r_u, out.r_u), 1e-10);
  EXPECT_LT(mat_diff(e_u, out.e_u), 1e-10);
}

TEST(MliForward, GradientsThroughAllStages) {
  Rng rng(40);
  MliConfig cfg = tiny_config(4, 2, 1, 3);
  Rng init_rng(17);
  MliLayerParams p = MliLayerParams::init(cfg, init_rng);
  Tensor r = random_tensor({3, 4}, rng);
  Tensor e = random_tensor({2, 4}, rng);
  auto build = [&p, &cfg](Tape& t, const std::vector<Tensor>& in) {
    MliOutput out = mli_forward(t, in[0], in[1], p, cfg, nullptr);
    return concat_cols(t, transpose(t, out.r_u), transpose(t, out.e_u));
  };
  // Inputs share storage with the layer parameters, so the same check
  // covers dL/dR, dL/dE and several parameter groups.
  const double err = check_gradients(
      build,
      {r, e, p.w_r, p.b_e, p.w_a, p.w_c, p.w_p, p.b_p, p.heads[0].w_qr,
       p.heads[0].w_k, p.heads[0].w_v, p.w_or, p.b_oe},
      rng);
  EXPECT_LT(err, 1e-4);
}

}  // namespace
}  // namespace mlin
