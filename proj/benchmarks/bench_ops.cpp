#include <benchmark/benchmark.h>

#include "inkcheck/rnn.hpp"

using namespace inkcheck;

namespace {

nn::TensorPtr random_tensor(std::vector<int> shape, Rng& rng, bool requires_grad = false) {
    auto t = nn::Tensor::zeros(std::move(shape), requires_grad);
    for (auto& v : t->data) v = rng.uniform(-1, 1);
    return t;
}

void BM_Conv2dSameForward(benchmark::State& state) {
    Rng rng(1);
    const int c = static_cast<int>(state.range(0));
    auto input = random_tensor({32, 128, c}, rng);
    auto kernels = random_tensor({3, 3, c, 2 * c}, rng);
    auto bias = random_tensor({2 * c}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_same(input, kernels, bias));
}
BENCHMARK(BM_Conv2dSameForward)->Arg(1)->Arg(8);

void BM_Conv2dSameTrainStep(benchmark::State& state) {
    Rng rng(2);
    auto input = random_tensor({16, 64, 8}, rng);
    auto kernels = random_tensor({3, 3, 8, 16}, rng, true);
    auto bias = random_tensor({16}, rng, true);
    for (auto _ : state) {
        kernels->zero_grad();
        bias->zero_grad();
        auto loss = nn::sum(nn::conv2d_same(input, kernels, bias));
        nn::backward(loss);
        benchmark::DoNotOptimize(kernels->grad.data());
    }
}
BENCHMARK(BM_Conv2dSameTrainStep);

void BM_Maxpool2x2(benchmark::State& state) {
    Rng rng(3);
    auto input = random_tensor({32, 128, 8}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(nn::maxpool2x2(input));
}
BENCHMARK(BM_Maxpool2x2);

void BM_BidirectionalRecurrent(benchmark::State& state) {
    Rng rng(4);
    const int hidden = 32;
    auto fwd = nn::GruParams::init(128, hidden, rng);
    auto bwd = nn::GruParams::init(128, hidden, rng);
    auto input = random_tensor({32, 128}, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(nn::bidirectional_recurrent(input, fwd, bwd, hidden));
}
BENCHMARK(BM_BidirectionalRecurrent);

void BM_CtcLoss(benchmark::State& state) {
    Rng rng(5);
    auto logits = random_tensor({32, 27}, rng, true);
    const std::vector<int> target{18, 15, 4, 11, 11};
    for (auto _ : state) {
        logits->zero_grad();
        auto loss = nn::ctc_loss(logits, target);
        nn::backward(loss);
        benchmark::DoNotOptimize(loss->data[0]);
    }
}
BENCHMARK(BM_CtcLoss);

}  // namespace
