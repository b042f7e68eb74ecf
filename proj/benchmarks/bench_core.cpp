#include <benchmark/benchmark.h>

#include "mlin/mli.hpp"
#include "mlin/ops.hpp"

namespace {

using namespace mlin;

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BM_MatMul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Tensor a = random_tensor({n, n}, rng);
  Tensor b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(matmul(tape, a, b));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_MatMul)->Arg(64)->Arg(128)->Arg(256);

void BM_SoftmaxRows(benchmark::State& state) {
  Rng rng(2);
  Tensor x = random_tensor({100, 512}, rng);
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(softmax_rows(tape, x));
  }
}
BENCHMARK(BM_SoftmaxRows);

MliConfig desk_config() {
  MliConfig cfg;
  cfg.d_model = 64;
  cfg.k = 6;
  cfg.heads = 4;
  cfg.head_dim = 16;
  cfg.dropout_rate = 0.0;
  return cfg;
}

MliConfig full_config() {
  MliConfig cfg;  // d=512, k=6, H=16, d_k=128
  cfg.dropout_rate = 0.0;
  return cfg;
}

void run_forward(benchmark::State& state, const MliConfig& cfg,
                 std::size_t m, std::size_t n) {
  Rng rng(3);
  MliLayerParams params = MliLayerParams::init(cfg, rng);
  Tensor r = random_tensor({m, cfg.d_model}, rng);
  Tensor e = random_tensor({n, cfg.d_model}, rng);
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(mli_forward(tape, r, e, params, cfg, nullptr));
  }
}

void BM_MliForwardDesk(benchmark::State& state) {
  run_forward(state, desk_config(), 8, 8);
}
BENCHMARK(BM_MliForwardDesk);

void BM_MliForwardFull(benchmark::State& state) {
  run_forward(state, full_config(), 100, 14);
}
BENCHMARK(BM_MliForwardFull);

void BM_MliForwardBackward(benchmark::State& state) {
  const MliConfig cfg = desk_config();
  Rng rng(4);
  MliLayerParams params = MliLayerParams::init(cfg, rng);
  Tensor r = random_tensor({8, cfg.d_model}, rng);
  Tensor e = random_tensor({8, cfg.d_model}, rng);
  for (auto _ : state) {
    Tape tape;
    MliOutput out = mli_forward(tape, r, e, params, cfg, nullptr);
    Tensor pooled = mean_rows(tape, out.r_u);
    Tensor loss = reshape(
        tape,
        matmul(tape, reshape(tape, pooled, {1, cfg.d_model}),
               Tensor::ones({cfg.d_model, 1})),
        {});
    tape.backward(loss);
    params.visit("", [](const std::string&, Tensor& t) { t.zero_grad(); });
    r.zero_grad();
    e.zero_grad();
  }
}
BENCHMARK(BM_MliForwardBackward);

}  // namespace

BENCHMARK_MAIN();
