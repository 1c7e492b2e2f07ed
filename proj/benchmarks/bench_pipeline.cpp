#include <benchmark/benchmark.h>

#include "inkcheck/classifier.hpp"
#include "inkcheck/evaluate.hpp"
#include "inkcheck/metrics.hpp"
#include "inkcheck/textgen.hpp"

using namespace inkcheck;

namespace {

void BM_RenderWord(benchmark::State& state) {
    Rng rng(1);
    const auto style = render::sample_style(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(render::render_word("benchmark", style, 7));
}
BENCHMARK(BM_RenderWord);

void BM_ExtractFeatures(benchmark::State& state) {
    hwr::HwrModel model(hwr::HwrConfig{}, 2);
    model.set_trainable(false);
    render::StyleParams style;
    const auto img = render::render_word("feature", style, 3);
    for (auto _ : state) benchmark::DoNotOptimize(hwr::extract_features(model, img));
}
BENCHMARK(BM_ExtractFeatures);

void BM_Predict(benchmark::State& state) {
    hwr::HwrModel extractor(hwr::HwrConfig{}, 4);
    extractor.set_trainable(false);
    classifier::ClassifierModel head(classifier::HeadConfig{}, 5);
    render::StyleParams style;
    const auto img = render::render_word("predict", style, 6);
    for (auto _ : state)
        benchmark::DoNotOptimize(classifier::predict(extractor, head, img, "predict"));
}
BENCHMARK(BM_Predict);

void BM_LevenshteinCer(benchmark::State& state) {
    Rng rng(7);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < 256; ++i) {
        std::string a, b;
        for (int j = 0; j < 8; ++j) {
            a.push_back(static_cast<char>('a' + rng.uniform_index(26)));
            b.push_back(static_cast<char>('a' + rng.uniform_index(26)));
        }
        pairs.emplace_back(std::move(a), std::move(b));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& [a, b] = pairs[i++ & 255];
        benchmark::DoNotOptimize(metrics::cer(a, b));
    }
}
BENCHMARK(BM_LevenshteinCer);

void BM_PrCurve(benchmark::State& state) {
    Rng rng(8);
    const int n = static_cast<int>(state.range(0));
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
        scores.push_back(rng.uniform());
        labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
    }
    labels[0] = 1;
    for (auto _ : state) benchmark::DoNotOptimize(eval::pr_curve(scores, labels));
}
BENCHMARK(BM_PrCurve)->Arg(1500)->Arg(15000);

void BM_GenerateMistake(benchmark::State& state) {
    Rng rng(9);
    for (auto _ : state)
        benchmark::DoNotOptimize(textgen::apply_severity(std::string("spelling"), 2, rng));
}
BENCHMARK(BM_GenerateMistake);

}  // namespace

BENCHMARK_MAIN();
