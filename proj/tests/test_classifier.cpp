#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "inkcheck/classifier.hpp"
#include "inkcheck/textgen.hpp"
#include "helpers.hpp"

using namespace inkcheck;

namespace {

classifier::HeadConfig paper_scale() {
    classifier::HeadConfig cfg;
    cfg.time_steps = 128;
    cfg.alphabet_size = 98;
    cfg.feature_dim = 512;
    cfg.conv_filters = {32, 32, 64, 64};
    return cfg;
}

classifier::HeadConfig tiny_head() {
    classifier::HeadConfig cfg;
    cfg.time_steps = 16;
    cfg.alphabet_size = 14;
    cfg.feature_dim = 6;
    cfg.conv_filters = {2, 2, 2, 2};
    return cfg;
}

nn::TensorPtr random_tensor(std::vector<int> shape, Rng& rng) {
    auto t = nn::Tensor::zeros(std::move(shape));
    for (auto& v : t->data) v = rng.uniform(-1, 1);
    return t;
}

}  // namespace

TEST_CASE("count_params reproduces the reference totals exactly") {
    CHECK(classifier::count_params(paper_scale()) == 135041);

    classifier::HeadConfig desk;  // defaults: T=32, A=26, D=64, (8,8,16,16)
    CHECK(classifier::count_params(desk) == 6369);
}

TEST_CASE("head config invariants") {
    classifier::HeadConfig cfg;
    cfg.time_steps = 30;  // not divisible by 16
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = classifier::HeadConfig{};
    cfg.alphabet_size = 27;  // parity violation: (32-27) odd
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = classifier::HeadConfig{};
    cfg.conv_filters = {0, 8, 8, 8};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = classifier::HeadConfig{};
    cfg.dropout_rate = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("align geometry at paper scale and desk scale") {
    Rng rng(1);
    SUBCASE("paper: 512 -> 128 compression, one-hot padded by 15 per side") {
        const auto cfg = paper_scale();
        CHECK(cfg.pad() == 15);
        classifier::ClassifierModel model(cfg, 3);
        auto features = random_tensor({128, 512}, rng);
        auto onehot = nn::Tensor::zeros({128, 98});
        for (int i = 0; i < 5; ++i) onehot->at(i, i + 1) = 1.0;
        auto pair = model.align(features, onehot);
        REQUIRE(pair->shape == std::vector<int>{128, 128, 2});
        // channel 1 equals the one-hot under a 15-column shift; outside is zero
        for (int i = 0; i < 128; ++i)
            for (int j = 0; j < 128; ++j) {
                const double expect = (j >= 15 && j < 113) ? onehot->at(i, j - 15) : 0.0;
                REQUIRE(pair->at(i, j, 1) == expect);
            }
    }
    SUBCASE("desk: pad 3 per side") {
        classifier::HeadConfig cfg;
        CHECK(cfg.pad() == 3);
        classifier::ClassifierModel model(cfg, 4);
        auto features = random_tensor({32, 64}, rng);
        auto onehot = render::one_hot_encode("pad", Alphabet::lowercase(), 32);
        auto pair = model.align(features, onehot);
        REQUIRE(pair->shape == std::vector<int>{32, 32, 2});
        for (int i = 0; i < 32; ++i) {
            for (int j = 0; j < 3; ++j) CHECK(pair->at(i, j, 1) == 0.0);
            for (int j = 29; j < 32; ++j) CHECK(pair->at(i, j, 1) == 0.0);
        }
        CHECK(pair->at(0, 3 + Alphabet::lowercase().index_of('p'), 1) == 1.0);
    }
    SUBCASE("zero features with zero compression weights give a zero channel 0") {
        classifier::HeadConfig cfg;
        classifier::ClassifierModel model(cfg, 5);
        for (const auto& p : model.parameters())
            std::fill(p->data.begin(), p->data.end(), 0.0);
        auto pair = model.align(nn::Tensor::zeros({32, 64}),
                                render::one_hot_encode("zero", Alphabet::lowercase(), 32));
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 32; ++j) CHECK(pair->at(i, j, 0) == 0.0);
    }
}

TEST_CASE("head_forward output range and the zero-weight midpoint") {
    Rng rng(6);
    classifier::HeadConfig cfg;
    classifier::ClassifierModel model(cfg, 7);

    auto features = random_tensor({32, 64}, rng);
    auto onehot = render::one_hot_encode("range", Alphabet::lowercase(), 32);
    Rng drop(1);
    const auto prob = model.head_forward(model.align(features, onehot), false, drop);
    CHECK(prob->data[0] > 0.0);
    CHECK(prob->data[0] < 1.0);

    for (const auto& p : model.parameters()) std::fill(p->data.begin(), p->data.end(), 0.0);
    const auto mid = model.head_forward(model.align(features, onehot), false, drop);
    CHECK(mid->data[0] == 0.5);
}

TEST_CASE("paper-scale shape walk: four pools shrink 128 to 8, flatten 4096") {
    const auto cfg = paper_scale();
    CHECK(cfg.flat_dim() == 4096);
    Rng rng(8);
    classifier::ClassifierModel model(cfg, 9);
    auto features = random_tensor({128, 512}, rng);
    auto onehot = nn::Tensor::zeros({128, 98});
    Rng drop(2);
    const auto prob = model.head_forward(model.align(features, onehot), false, drop);
    CHECK(prob->data[0] > 0.0);
    CHECK(prob->data[0] < 1.0);

    classifier::HeadConfig desk;
    CHECK(desk.flat_dim() == 2 * 2 * 16);
}

TEST_CASE("score is invariant to the dropout stream at inference") {
    Rng rng(10);
    classifier::ClassifierModel model(classifier::HeadConfig{}, 11);
    auto features = random_tensor({32, 64}, rng);
    auto onehot = render::one_hot_encode("stable", Alphabet::lowercase(), 32);
    const double a = model.score(features, onehot);
    const double b = model.score(features, onehot);
    CHECK(a == b);
}

TEST_CASE("BCE gradients through align+head match finite differences") {
    Rng rng(12);
    const auto cfg = tiny_head();
    classifier::ClassifierModel model(cfg, 13);
    auto features = random_tensor({cfg.time_steps, cfg.feature_dim}, rng);
    auto onehot = nn::Tensor::zeros({cfg.time_steps, cfg.alphabet_size});
    for (int i = 0; i < 4; ++i) onehot->at(i, i) = 1.0;

    auto build = [&]() {
        Rng drop(3);
        auto prob = model.head_forward(model.align(features, onehot), true, drop);
        return nn::bce_loss(prob, 1.0);
    };
    Rng coords(14);
    const auto res = testutil::check_gradients(model.parameters(), build, 12, coords);
    CHECK(res.checked >= 100);
    CHECK(res.failed == 0);
}

TEST_CASE("training reaches near-zero loss on ten examples and freezes the extractor") {
    const std::vector<std::string> words{"apple", "mount", "river", "tiger", "sound"};
    auto correct = textgen::build_dataset(words, 0.0, 1, 31);
    auto wrong = textgen::build_dataset(words, 1.0, 1, 32);

    data::Dataset train;
    train.manifest.seed = 33;
    for (std::size_t i = 0; i < words.size(); ++i) {
        train.manifest.examples.push_back(correct.manifest.examples[i]);
        train.images.push_back(correct.images[i]);
        train.manifest.examples.push_back(wrong.manifest.examples[i]);
        train.images.push_back(wrong.images[i]);
    }

    hwr::HwrModel extractor(hwr::HwrConfig{}, 34);
    extractor.set_trainable(false);
    const auto before = extractor.snapshot();

    classifier::ClassifierModel model(classifier::HeadConfig{}, 35);
    nn::TrainSchedule sched;
    sched.epochs = 300;
    sched.batch_size = 5;
    sched.lr_start = 5e-3;
    sched.lr_end = 5e-4;
    sched.patience = 300;
    sched.seed = 36;
    const auto result = classifier::train_classifier(model, extractor, train, train, sched);

    CHECK(result.log.back().train_loss < 0.01);
    CHECK(extractor.snapshot() == before);  // bit-identical after training
    // gradient buffers never even exist on the frozen extractor
    for (const auto& p : extractor.parameters()) CHECK(p->grad.empty());
}

TEST_CASE("validation balance warning") {
    const std::vector<std::string> words{"one", "two", "six", "ten"};
    auto train = textgen::build_dataset(words, 0.5, 1, 41);
    auto val = textgen::build_dataset(words, 0.0, 1, 42);  // all correct: unbalanced

    hwr::HwrModel extractor(hwr::HwrConfig{}, 43);
    extractor.set_trainable(false);
    classifier::ClassifierModel model(classifier::HeadConfig{}, 44);
    nn::TrainSchedule sched;
    sched.epochs = 1;
    sched.batch_size = 4;
    const auto result = classifier::train_classifier(model, extractor, train, val, sched);
    CHECK(result.val_balance_warning);
}

TEST_CASE("classifier checkpoints pin both digests") {
    classifier::ClassifierModel model(classifier::HeadConfig{}, 51);
    const std::uint64_t extractor_digest = hwr::HwrConfig{}.digest();
    const auto path = std::filesystem::temp_directory_path() / "inkcheck_cls_ckpt_test.bin";
    io::save_checkpoint(model.to_checkpoint(extractor_digest), path);
    const auto loaded = io::load_checkpoint(path);

    auto restored =
        classifier::ClassifierModel::from_checkpoint(loaded, classifier::HeadConfig{}, extractor_digest);
    Rng rng(52);
    auto features = random_tensor({32, 64}, rng);
    auto onehot = render::one_hot_encode("same", Alphabet::lowercase(), 32);
    CHECK(restored.score(features, onehot) == model.score(features, onehot));

    CHECK_THROWS_AS(classifier::ClassifierModel::from_checkpoint(loaded, classifier::HeadConfig{},
                                                                 extractor_digest + 1),
                    ConfigError);
    classifier::HeadConfig other;
    other.conv_filters = {4, 4, 8, 8};
    CHECK_THROWS_AS(classifier::ClassifierModel::from_checkpoint(loaded, other, extractor_digest),
                    ConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("predict is deterministic end to end") {
    hwr::HwrModel extractor(hwr::HwrConfig{}, 61);
    extractor.set_trainable(false);
    classifier::ClassifierModel head(classifier::HeadConfig{}, 62);
    render::StyleParams style;
    const auto img = render::render_word("stable", style, 63);
    const double a = classifier::predict(extractor, head, img, "stable");
    const double b = classifier::predict(extractor, head, img, "stable");
    CHECK(a == b);
    CHECK(a > 0.0);
    CHECK(a < 1.0);
}
