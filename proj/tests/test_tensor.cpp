#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "inkcheck/optim.hpp"
#include "inkcheck/rnn.hpp"
#include "helpers.hpp"

using namespace inkcheck;
using nn::Tensor;
using nn::TensorPtr;

namespace {

TensorPtr random_tensor(std::vector<int> shape, Rng& rng, bool requires_grad = false,
                        double span = 1.0) {
    auto t = Tensor::zeros(std::move(shape), requires_grad);
    for (auto& v : t->data) v = rng.uniform(-span, span);
    return t;
}

}  // namespace

TEST_CASE("conv2d_same: zero input passes only bias") {
    Rng rng(1);
    auto input = Tensor::zeros({4, 4, 1});
    auto kernels = random_tensor({3, 3, 1, 1}, rng);
    auto bias = Tensor::from({1}, {0.5});
    auto out = nn::conv2d_same(input, kernels, bias);
    REQUIRE(out->shape == std::vector<int>{4, 4, 1});
    for (double v : out->data) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("conv2d_same: center-delta kernel is the identity") {
    Rng rng(2);
    auto input = random_tensor({5, 6, 1}, rng);
    auto kernels = Tensor::zeros({3, 3, 1, 1});
    kernels->data[(1 * 3 + 1) * 1 * 1] = 1.0;  // center tap of the 3x3 kernel
    auto bias = Tensor::zeros({1});
    auto out = nn::conv2d_same(input, kernels, bias);
    for (std::size_t i = 0; i < input->data.size(); ++i)
        CHECK(out->data[i] == doctest::Approx(input->data[i]));
}

TEST_CASE("conv2d_same matches the direct nested-loop oracle") {
    Rng rng(3);
    const int h = 5, w = 5, ci = 2, co = 3;
    auto input = random_tensor({h, w, ci}, rng);
    auto kernels = random_tensor({3, 3, ci, co}, rng);
    auto bias = random_tensor({co}, rng);
    auto out = nn::conv2d_same(input, kernels, bias);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int o = 0; o < co; ++o) {
                double expect = bias->at(o);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int yy = y + dy, xx = x + dx;
                        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                        for (int i = 0; i < ci; ++i)
                            expect += input->at(yy, xx, i) *
                                      kernels->data[(((dy + 1) * 3 + dx + 1) * ci + i) * co + o];
                    }
                CHECK(out->at(y, x, o) == doctest::Approx(expect).epsilon(1e-12));
            }
    CHECK(out->shape == std::vector<int>{h, w, co});  // same padding keeps dims
}

TEST_CASE("conv2d_same rejects mismatched shapes") {
    Rng rng(4);
    auto input = random_tensor({4, 4, 2}, rng);
    auto kernels = random_tensor({3, 3, 3, 1}, rng);
    CHECK_THROWS_AS(nn::conv2d_same(input, kernels, Tensor::zeros({1})), DimensionError);
}

TEST_CASE("maxpool2x2 basics") {
    auto input = Tensor::from({2, 2, 1}, {1, 2, 3, 4});
    auto out = nn::maxpool2x2(input);
    CHECK(out->shape == std::vector<int>{1, 1, 1});
    CHECK(out->data[0] == 4.0);
    CHECK_THROWS_AS(nn::maxpool2x2(Tensor::zeros({3, 4, 1})), DimensionError);
}

TEST_CASE("maxpool2x2 ties route gradient to the first cell in row-major order") {
    auto input = Tensor::full({2, 2, 1}, 7.0, true);
    auto out = nn::maxpool2x2(input);
    nn::backward(nn::sum(out));
    CHECK(input->grad[0] == 1.0);
    CHECK(input->grad[1] == 0.0);
    CHECK(input->grad[2] == 0.0);
    CHECK(input->grad[3] == 0.0);
}

TEST_CASE("maxpool2x2 matches a window-scan oracle and halves dims") {
    Rng rng(5);
    auto input = random_tensor({8, 8, 3}, rng);
    auto out = nn::maxpool2x2(input);
    REQUIRE(out->shape == std::vector<int>{4, 4, 3});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c) {
                double best = -1e300;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx)
                        best = std::max(best, input->at(2 * y + dy, 2 * x + dx, c));
                CHECK(out->at(y, x, c) == best);
            }
}

TEST_CASE("dense") {
    SUBCASE("identity weights reproduce the input") {
        auto x = Tensor::from({3}, {1.5, -2.0, 0.25});
        auto w = Tensor::zeros({3, 3});
        for (int i = 0; i < 3; ++i) w->at(i, i) = 1.0;
        auto out = nn::dense(x, w, Tensor::zeros({3}));
        for (int i = 0; i < 3; ++i) CHECK(out->at(i) == x->at(i));
    }
    SUBCASE("zero input passes the bias") {
        auto out = nn::dense(Tensor::zeros({4}), Tensor::zeros({4, 2}),
                             Tensor::from({2}, {0.3, -0.7}));
        CHECK(out->at(0) == 0.3);
        CHECK(out->at(1) == -0.7);
    }
    SUBCASE("random case matches the dot-product oracle") {
        Rng rng(6);
        auto x = random_tensor({4}, rng);
        auto w = random_tensor({4, 3}, rng);
        auto b = random_tensor({3}, rng);
        auto out = nn::dense(x, w, b);
        for (int j = 0; j < 3; ++j) {
            double expect = b->at(j);
            for (int i = 0; i < 4; ++i) expect += x->at(i) * w->at(i, j);
            CHECK(out->at(j) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(nn::dense(Tensor::zeros({4}), Tensor::zeros({3, 2}), Tensor::zeros({2})),
                        DimensionError);
    }
}

TEST_CASE("time_distributed_dense") {
    Rng rng(7);
    auto w = random_tensor({4, 2}, rng);
    auto b = random_tensor({2}, rng);
    SUBCASE("T=1 is identical to dense") {
        auto x = random_tensor({4}, rng);
        auto xr = nn::reshape(x, {1, 4});
        auto td = nn::time_distributed_dense(xr, w, b);
        auto d = nn::dense(x, w, b);
        CHECK(td->at(0, 0) == doctest::Approx(d->at(0)));
        CHECK(td->at(0, 1) == doctest::Approx(d->at(1)));
    }
    SUBCASE("duplicate input rows give duplicate output rows") {
        auto x = Tensor::zeros({3, 4});
        for (int j = 0; j < 4; ++j) {
            const double v = rng.uniform(-1, 1);
            x->at(0, j) = v;
            x->at(2, j) = v;
            x->at(1, j) = rng.uniform(-1, 1);
        }
        auto out = nn::time_distributed_dense(x, w, b);
        CHECK(out->at(0, 0) == out->at(2, 0));
        CHECK(out->at(0, 1) == out->at(2, 1));
    }
    SUBCASE("5x4 -> 5x2 matches the per-row dense oracle") {
        auto x = random_tensor({5, 4}, rng);
        auto out = nn::time_distributed_dense(x, w, b);
        for (int t = 0; t < 5; ++t) {
            auto r = nn::dense(nn::row(x, t), w, b);
            CHECK(out->at(t, 0) == doctest::Approx(r->at(0)).epsilon(1e-12));
            CHECK(out->at(t, 1) == doctest::Approx(r->at(1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("bidirectional recurrent block") {
    Rng rng(8);
    const int hidden = 3, feat = 4;
    auto fwd = nn::GruParams::init(feat, hidden, rng);
    auto bwd = nn::GruParams::init(feat, hidden, rng);

    SUBCASE("empty sequence is rejected") {
        CHECK_THROWS_AS(nn::bidirectional_recurrent(Tensor::zeros({1, feat, 1}), fwd, bwd, hidden),
                        DimensionError);
    }
    SUBCASE("T=1: both halves come from the same single step") {
        auto x = random_tensor({1, feat}, rng);
        auto out = nn::bidirectional_recurrent(x, fwd, bwd, hidden);
        REQUIRE(out->shape == std::vector<int>{1, 2 * hidden});
        auto fwd_only = nn::gru_unroll(x, fwd, hidden, false);
        auto bwd_only = nn::gru_unroll(x, bwd, hidden, true);
        for (int j = 0; j < hidden; ++j) {
            CHECK(out->at(0, j) == fwd_only[0]->at(j));
            CHECK(out->at(0, hidden + j) == bwd_only[0]->at(j));
        }
    }
    SUBCASE("reversing the input swaps the halves, each reversed in time") {
        const int t_steps = 4;
        auto x = random_tensor({t_steps, feat}, rng);
        auto xrev = Tensor::zeros({t_steps, feat});
        for (int t = 0; t < t_steps; ++t)
            for (int j = 0; j < feat; ++j) xrev->at(t, j) = x->at(t_steps - 1 - t, j);
        auto out = nn::bidirectional_recurrent(x, fwd, bwd, hidden);
        // Same parameters on both directions isolates the symmetry.
        auto out_rev = nn::bidirectional_recurrent(xrev, bwd, fwd, hidden);
        for (int t = 0; t < t_steps; ++t)
            for (int j = 0; j < hidden; ++j) {
                CHECK(out->at(t, j) ==
                      doctest::Approx(out_rev->at(t_steps - 1 - t, hidden + j)).epsilon(1e-12));
                CHECK(out->at(t, hidden + j) ==
                      doctest::Approx(out_rev->at(t_steps - 1 - t, j)).epsilon(1e-12));
            }
    }
    SUBCASE("random T=3 case matches a hand-unrolled cell oracle") {
        const int t_steps = 3;
        auto x = random_tensor({t_steps, feat}, rng);
        auto out = nn::bidirectional_recurrent(x, fwd, bwd, hidden);

        auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
        auto step = [&](const nn::GruParams& p, const std::vector<double>& h,
                        const double* xt) {
            std::vector<double> z(hidden), r(hidden), c(hidden), hn(hidden);
            for (int j = 0; j < hidden; ++j) {
                double az = p.bz->at(j), ar = p.br->at(j);
                for (int i = 0; i < feat; ++i) {
                    az += xt[i] * p.wz->at(i, j);
                    ar += xt[i] * p.wr->at(i, j);
                }
                for (int i = 0; i < hidden; ++i) {
                    az += h[static_cast<std::size_t>(i)] * p.uz->at(i, j);
                    ar += h[static_cast<std::size_t>(i)] * p.ur->at(i, j);
                }
                z[static_cast<std::size_t>(j)] = sig(az);
                r[static_cast<std::size_t>(j)] = sig(ar);
            }
            for (int j = 0; j < hidden; ++j) {
                double ac = p.bc->at(j);
                for (int i = 0; i < feat; ++i) ac += xt[i] * p.wc->at(i, j);
                for (int i = 0; i < hidden; ++i)
                    ac += r[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)] * p.uc->at(i, j);
                c[static_cast<std::size_t>(j)] = std::tanh(ac);
            }
            for (int j = 0; j < hidden; ++j)
                hn[static_cast<std::size_t>(j)] =
                    h[static_cast<std::size_t>(j)] +
                    z[static_cast<std::size_t>(j)] * (c[static_cast<std::size_t>(j)] - h[static_cast<std::size_t>(j)]);
            return hn;
        };

        std::vector<std::vector<double>> hf, hb(static_cast<std::size_t>(t_steps));
        std::vector<double> h(static_cast<std::size_t>(hidden), 0.0);
        for (int t = 0; t < t_steps; ++t) {
            h = step(fwd, h, x->data.data() + static_cast<std::size_t>(t) * feat);
            hf.push_back(h);
        }
        h.assign(static_cast<std::size_t>(hidden), 0.0);
        for (int t = t_steps - 1; t >= 0; --t) {
            h = step(bwd, h, x->data.data() + static_cast<std::size_t>(t) * feat);
            hb[static_cast<std::size_t>(t)] = h;
        }
        for (int t = 0; t < t_steps; ++t)
            for (int j = 0; j < hidden; ++j) {
                CHECK(out->at(t, j) ==
                      doctest::Approx(hf[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)]).epsilon(1e-10));
                CHECK(out->at(t, hidden + j) ==
                      doctest::Approx(hb[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)]).epsilon(1e-10));
            }
    }
}

TEST_CASE("dropout") {
    Rng rng(9);
    auto x = random_tensor({100}, rng);
    SUBCASE("rate 0 is the identity") {
        auto out = nn::dropout(x, 0.0, true, rng);
        CHECK(out->data == x->data);
    }
    SUBCASE("inference mode is bit-identical to the identity at any rate") {
        auto out = nn::dropout(x, 0.9, false, rng);
        CHECK(out->data == x->data);
    }
    SUBCASE("training zero fraction is close to the rate") {
        auto big = Tensor::full({10000}, 1.0);
        auto out = nn::dropout(big, 0.1, true, rng);
        int zeros = 0;
        for (double v : out->data) {
            if (v == 0.0)
                ++zeros;
            else
                CHECK(v == doctest::Approx(1.0 / 0.9));
        }
        const double frac = zeros / 10000.0;
        CHECK(frac == doctest::Approx(0.1).epsilon(0.1));
        CHECK(std::abs(frac - 0.1) < 0.01);
    }
    SUBCASE("invalid rate") {
        CHECK_THROWS_AS(nn::dropout(x, 1.0, true, rng), ArgumentError);
    }
}

TEST_CASE("bce_loss values") {
    auto half = Tensor::from({1}, {0.5});
    CHECK(nn::bce_loss(half, 1.0)->data[0] == doctest::Approx(std::log(2.0)));
    CHECK(nn::bce_loss(half, 0.0)->data[0] == doctest::Approx(std::log(2.0)));
    auto close = Tensor::from({1}, {0.999999});
    CHECK(nn::bce_loss(close, 1.0)->data[0] == doctest::Approx(0.0).epsilon(1e-5));
    auto nine = Tensor::from({1}, {0.9});
    CHECK(nn::bce_loss(nine, 0.0)->data[0] == doctest::Approx(-std::log(0.1)));
    // clamping keeps the loss finite at the extremes
    CHECK(std::isfinite(nn::bce_loss(Tensor::from({1}, {0.0}), 1.0)->data[0]));
    CHECK(std::isfinite(nn::bce_loss(Tensor::from({1}, {1.0}), 0.0)->data[0]));
}

TEST_CASE("softmax rows sum to one") {
    Rng rng(10);
    auto x = random_tensor({7, 5}, rng, false, 4.0);
    auto y = nn::softmax_rows(x);
    for (int t = 0; t < 7; ++t) {
        double s = 0.0;
        for (int j = 0; j < 5; ++j) s += y->at(t, j);
        CHECK(std::abs(s - 1.0) < 1e-10);
    }
}

TEST_CASE("backward: constant loss leaves parameter gradients at zero") {
    Rng rng(11);
    auto param = random_tensor({4}, rng, true);
    auto constant = Tensor::full({3}, 2.0);
    auto loss = nn::sum(nn::mul(constant, constant));
    CHECK_FALSE(loss->requires_grad);
    nn::backward(loss);  // no-op walk
    for (double g : param->grad) CHECK(g == 0.0);
}

TEST_CASE("backward: dense layer with quadratic loss matches the closed form") {
    // loss = sum((x.w)^2) => dloss/dw = 2 * x^T (x.w)
    Rng rng(12);
    auto x = random_tensor({3}, rng);
    auto w = random_tensor({3, 2}, rng, true);
    auto y = nn::matvec(x, w);
    auto loss = nn::sum(nn::mul(y, y));
    nn::backward(loss);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(w->grad[static_cast<std::size_t>(i) * 2 + j] ==
                  doctest::Approx(2.0 * x->at(i) * y->at(j)).epsilon(1e-12));
}

TEST_CASE("finite differences agree for every layer kind") {
    Rng rng(13);
    Rng coord_rng(14);

    SUBCASE("conv2d_same + relu + maxpool2x2") {
        auto input = random_tensor({6, 6, 2}, rng, true);
        auto kernels = random_tensor({3, 3, 2, 3}, rng, true);
        auto bias = random_tensor({3}, rng, true);
        auto weight = random_tensor({27}, rng);  // 3x3x3 pooled output flattened
        auto build = [&]() {
            auto pooled = nn::maxpool2x2(nn::relu(nn::conv2d_same(input, kernels, bias)));
            return nn::sum(nn::mul(nn::flatten(pooled), weight));
        };
        auto res = testutil::check_gradients({input, kernels, bias}, build, 34, coord_rng);
        CHECK(res.checked >= 100);
        CHECK(res.failed == 0);
    }
    SUBCASE("dense + sigmoid + bce") {
        auto x = random_tensor({6}, rng, true);
        auto w = random_tensor({6, 1}, rng, true);
        auto b = random_tensor({1}, rng, true);
        auto build = [&]() { return nn::bce_loss(nn::sigmoid(nn::dense(x, w, b)), 1.0); };
        auto res = testutil::check_gradients({x, w, b}, build, 34, coord_rng);
        CHECK(res.checked >= 100);
        CHECK(res.failed == 0);
    }
    SUBCASE("time_distributed_dense + tanh") {
        auto x = random_tensor({5, 4}, rng, true);
        auto w = random_tensor({4, 3}, rng, true);
        auto b = random_tensor({3}, rng, true);
        auto probe = random_tensor({15}, rng);
        auto build = [&]() {
            return nn::sum(
                nn::mul(nn::flatten(nn::tanh_act(nn::time_distributed_dense(x, w, b))), probe));
        };
        auto res = testutil::check_gradients({x, w, b}, build, 34, coord_rng);
        CHECK(res.checked >= 100);
        CHECK(res.failed == 0);
    }
    SUBCASE("bidirectional recurrent") {
        auto fwd = nn::GruParams::init(3, 2, rng);
        auto bwd = nn::GruParams::init(3, 2, rng);
        auto x = random_tensor({3, 3}, rng, true);
        auto probe = random_tensor({12}, rng);
        auto build = [&]() {
            return nn::sum(
                nn::mul(nn::flatten(nn::bidirectional_recurrent(x, fwd, bwd, 2)), probe));
        };
        std::vector<TensorPtr> params{x};
        for (const auto& p : fwd.parameters()) params.push_back(p);
        for (const auto& p : bwd.parameters()) params.push_back(p);
        auto res = testutil::check_gradients(params, build, 6, coord_rng);
        CHECK(res.checked >= 100);
        CHECK(res.failed == 0);
    }
    SUBCASE("dropout (fixed mask via fixed seed)") {
        auto x = random_tensor({40}, rng, true);
        auto probe = random_tensor({40}, rng);
        auto build = [&]() {
            Rng drop_rng(99);
            return nn::sum(nn::mul(nn::dropout(x, 0.25, true, drop_rng), probe));
        };
        auto res = testutil::check_gradients({x}, build, 100, coord_rng);
        CHECK(res.checked >= 100);
        CHECK(res.failed == 0);
    }
    SUBCASE("softmax_rows") {
        auto x = random_tensor({4, 5}, rng, true);
        auto probe = random_tensor({20}, rng);
        auto build = [&]() {
            return nn::sum(nn::mul(nn::flatten(nn::softmax_rows(x)), probe));
        };
        auto res = testutil::check_gradients({x}, build, 100, coord_rng);
        CHECK(res.checked >= 100);
        CHECK(res.failed == 0);
    }
    SUBCASE("ctc_loss") {
        auto logits = random_tensor({5, 4}, rng, true, 2.0);
        const std::vector<int> target{0, 1, 0};
        auto build = [&]() { return nn::ctc_loss(logits, target); };
        auto res = testutil::check_gradients({logits}, build, 100, coord_rng);
        CHECK(res.checked >= 100);
        CHECK(res.failed == 0);
    }
}

TEST_CASE("backward reports non-finite gradients with the op name") {
    auto x = Tensor::from({1}, {1e308}, true);
    auto y = nn::mul(x, x);  // overflows to inf
    auto loss = nn::sum(y);
    CHECK_THROWS_AS(nn::backward(loss), NumericError);
}

TEST_CASE("rmsprop") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        auto p = Tensor::from({2}, {1.0, -2.0}, true);
        auto state = nn::OptimizerState::init({p}, 0.001);
        nn::rmsprop_step({p}, state);
        CHECK(p->data[0] == 1.0);
        CHECK(p->data[1] == -2.0);
    }
    SUBCASE("first step with unit gradient") {
        auto p = Tensor::from({1}, {0.0}, true);
        p->grad[0] = 1.0;
        auto state = nn::OptimizerState::init({p}, 0.001);
        nn::rmsprop_step({p}, state);
        // acc = 0.1, step = -lr/(sqrt(0.1)+eps)
        CHECK(p->data[0] == doctest::Approx(-0.001 / (std::sqrt(0.1) + 1e-7)).epsilon(1e-12));
        CHECK(p->data[0] == doctest::Approx(-0.0031623).epsilon(1e-4));
    }
    SUBCASE("two steps with constant gradient match the hand-unrolled recurrence") {
        auto p = Tensor::from({1}, {0.5}, true);
        const double g = 0.3, lr = 0.01, rho = 0.9, eps = 1e-7;
        auto state = nn::OptimizerState::init({p}, lr, rho, eps);
        p->grad[0] = g;
        nn::rmsprop_step({p}, state);
        p->grad[0] = g;
        nn::rmsprop_step({p}, state);
        double acc = (1 - rho) * g * g;
        double expect = 0.5 - lr * g / (std::sqrt(acc) + eps);
        acc = rho * acc + (1 - rho) * g * g;
        expect -= lr * g / (std::sqrt(acc) + eps);
        CHECK(p->data[0] == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("accumulators stay non-negative") {
        Rng rng(20);
        auto p = random_tensor({16}, rng, true);
        auto state = nn::OptimizerState::init({p}, 0.001);
        for (int i = 0; i < 10; ++i) {
            for (auto& g : p->grad) g = rng.uniform(-2, 2);
            nn::rmsprop_step({p}, state);
        }
        for (double a : state.accumulators[0]) CHECK(a >= 0.0);
    }
}

TEST_CASE("geometric learning rate decay hits both endpoints") {
    CHECK(nn::geometric_lr(1e-3, 4e-5, 0, 40) == doctest::Approx(1e-3));
    CHECK(nn::geometric_lr(1e-3, 4e-5, 39, 40) == doctest::Approx(4e-5));
    // monotone decreasing in between
    double prev = 1e-3;
    for (int e = 1; e < 40; ++e) {
        const double lr = nn::geometric_lr(1e-3, 4e-5, e, 40);
        CHECK(lr < prev);
        prev = lr;
    }
}

TEST_CASE("determinism: same seed, same graph, same results") {
    auto run = [](std::uint64_t seed) {
        Rng rng(seed);
        auto x = random_tensor({4, 4, 1}, rng, true);
        auto k = random_tensor({3, 3, 1, 2}, rng, true);
        auto b = random_tensor({2}, rng, true);
        auto loss = nn::sum(nn::conv2d_same(x, k, b));
        nn::backward(loss);
        auto state = nn::OptimizerState::init({k}, 0.01);
        nn::rmsprop_step({k}, state);
        return k->data;
    };
    CHECK(run(42) == run(42));
    CHECK(run(42) != run(43));
}
