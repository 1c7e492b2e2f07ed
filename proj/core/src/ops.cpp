#include "inkcheck/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace inkcheck::nn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
    if (!cond) throw DimensionError(msg);
}

double log_sum_exp2(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_sum_exp3(double a, double b, double c) { return log_sum_exp2(log_sum_exp2(a, b), c); }

}  // namespace

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    require(a->shape == b->shape, "add: shape mismatch");
    auto out = make_node("add", a->shape, {a, b});
    for (std::size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] + b->data[i];
    Tensor* self = out.get();
    Tensor *pa = a.get(), *pb = b.get();
    out->backward_fn = [self, pa, pb]() {
        if (pa->requires_grad)
            for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
        if (pb->requires_grad)
            for (std::size_t i = 0; i < self->grad.size(); ++i) pb->grad[i] += self->grad[i];
    };
    return out;
}

TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
    require(a->shape == b->shape, "sub: shape mismatch");
    auto out = make_node("sub", a->shape, {a, b});
    for (std::size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] - b->data[i];
    Tensor* self = out.get();
    Tensor *pa = a.get(), *pb = b.get();
    out->backward_fn = [self, pa, pb]() {
        if (pa->requires_grad)
            for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
        if (pb->requires_grad)
            for (std::size_t i = 0; i < self->grad.size(); ++i) pb->grad[i] -= self->grad[i];
    };
    return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    require(a->shape == b->shape, "mul: shape mismatch");
    auto out = make_node("mul", a->shape, {a, b});
    for (std::size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] * b->data[i];
    Tensor* self = out.get();
    Tensor *pa = a.get(), *pb = b.get();
    out->backward_fn = [self, pa, pb]() {
        if (pa->requires_grad)
            for (std::size_t i = 0; i < self->grad.size(); ++i)
                pa->grad[i] += self->grad[i] * pb->data[i];
        if (pb->requires_grad)
            for (std::size_t i = 0; i < self->grad.size(); ++i)
                pb->grad[i] += self->grad[i] * pa->data[i];
    };
    return out;
}

TensorPtr scale(const TensorPtr& a, double s) {
    auto out = make_node("scale", a->shape, {a});
    for (std::size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] * s;
    Tensor* self = out.get();
    Tensor* pa = a.get();
    out->backward_fn = [self, pa, s]() {
        if (pa->requires_grad)
            for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i] * s;
    };
    return out;
}

TensorPtr add_rowwise(const TensorPtr& x, const TensorPtr& bias) {
    require(x->shape.size() == 2 && bias->shape.size() == 1 && x->shape[1] == bias->shape[0],
            "add_rowwise: expected [T,K] + [K]");
    const int t_steps = x->shape[0], k = x->shape[1];
    auto out = make_node("add_rowwise", x->shape, {x, bias});
    for (int t = 0; t < t_steps; ++t)
        for (int j = 0; j < k; ++j)
            out->data[static_cast<std::size_t>(t) * k + j] =
                x->data[static_cast<std::size_t>(t) * k + j] + bias->data[j];
    Tensor* self = out.get();
    Tensor *px = x.get(), *pb = bias.get();
    out->backward_fn = [self, px, pb, t_steps, k]() {
        if (px->requires_grad)
            for (std::size_t i = 0; i < self->grad.size(); ++i) px->grad[i] += self->grad[i];
        if (pb->requires_grad)
            for (int t = 0; t < t_steps; ++t)
                for (int j = 0; j < k; ++j)
                    pb->grad[j] += self->grad[static_cast<std::size_t>(t) * k + j];
    };
    return out;
}

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    require(a->shape.size() == 2 && b->shape.size() == 2 && a->shape[1] == b->shape[0],
            "matmul: expected [m,k]x[k,n]");
    const int m = a->shape[0], k = a->shape[1], n = b->shape[1];
    auto out = make_node("matmul", {m, n}, {a, b});
    const double* ad = a->data.data();
    const double* bd = b->data.data();
    double* od = out->data.data();
    for (int i = 0; i < m; ++i)
        for (int l = 0; l < k; ++l) {
            const double av = ad[static_cast<std::size_t>(i) * k + l];
            const double* brow = bd + static_cast<std::size_t>(l) * n;
            double* orow = od + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    Tensor* self = out.get();
    Tensor *pa = a.get(), *pb = b.get();
    out->backward_fn = [self, pa, pb, m, k, n]() {
        const double* g = self->grad.data();
        if (pa->requires_grad) {
            double* ga = pa->grad.data();
            const double* bd = pb->data.data();
            for (int i = 0; i < m; ++i)
                for (int l = 0; l < k; ++l) {
                    const double* brow = bd + static_cast<std::size_t>(l) * n;
                    const double* grow = g + static_cast<std::size_t>(i) * n;
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
                    ga[static_cast<std::size_t>(i) * k + l] += acc;
                }
        }
        if (pb->requires_grad) {
            double* gb = pb->grad.data();
            const double* ad = pa->data.data();
            for (int i = 0; i < m; ++i)
                for (int l = 0; l < k; ++l) {
                    const double av = ad[static_cast<std::size_t>(i) * k + l];
                    const double* grow = g + static_cast<std::size_t>(i) * n;
                    double* gbrow = gb + static_cast<std::size_t>(l) * n;
                    for (int j = 0; j < n; ++j) gbrow[j] += av * grow[j];
                }
        }
    };
    return out;
}

TensorPtr matvec(const TensorPtr& x, const TensorPtr& w) {
    require(x->shape.size() == 1 && w->shape.size() == 2 && x->shape[0] == w->shape[0],
            "matvec: expected [k]x[k,n]");
    const int k = x->shape[0], n = w->shape[1];
    auto out = make_node("matvec", {n}, {x, w});
    for (int l = 0; l < k; ++l) {
        const double xv = x->data[l];
        const double* wrow = w->data.data() + static_cast<std::size_t>(l) * n;
        for (int j = 0; j < n; ++j) out->data[j] += xv * wrow[j];
    }
    Tensor* self = out.get();
    Tensor *px = x.get(), *pw = w.get();
    out->backward_fn = [self, px, pw, k, n]() {
        const double* g = self->grad.data();
        if (px->requires_grad) {
            for (int l = 0; l < k; ++l) {
                const double* wrow = pw->data.data() + static_cast<std::size_t>(l) * n;
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += g[j] * wrow[j];
                px->grad[l] += acc;
            }
        }
        if (pw->requires_grad) {
            for (int l = 0; l < k; ++l) {
                const double xv = px->data[l];
                double* gw = pw->grad.data() + static_cast<std::size_t>(l) * n;
                for (int j = 0; j < n; ++j) gw[j] += xv * g[j];
            }
        }
    };
    return out;
}

TensorPtr sum(const TensorPtr& a) {
    auto out = make_node("sum", {1}, {a});
    double acc = 0.0;
    for (double v : a->data) acc += v;
    out->data[0] = acc;
    Tensor* self = out.get();
    Tensor* pa = a.get();
    out->backward_fn = [self, pa]() {
        if (pa->requires_grad) {
            const double g = self->grad[0];
            for (auto& gv : pa->grad) gv += g;
        }
    };
    return out;
}

TensorPtr dense(const TensorPtr& x, const TensorPtr& weights, const TensorPtr& bias) {
    require(bias->shape.size() == 1 && weights->shape.size() == 2 &&
                weights->shape[1] == bias->shape[0],
            "dense: weight/bias mismatch");
    return add(matvec(x, weights), bias);
}

TensorPtr time_distributed_dense(const TensorPtr& x, const TensorPtr& weights,
                                 const TensorPtr& bias) {
    require(x->shape.size() == 2, "time_distributed_dense: expected [T,D] input");
    return add_rowwise(matmul(x, weights), bias);
}

namespace {

template <typename Fwd, typename Bwd>
TensorPtr unary_elementwise(const char* name, const TensorPtr& a, Fwd f, Bwd dfdy) {
    auto out = make_node(name, a->shape, {a});
    for (std::size_t i = 0; i < out->data.size(); ++i) out->data[i] = f(a->data[i]);
    Tensor* self = out.get();
    Tensor* pa = a.get();
    out->backward_fn = [self, pa, dfdy]() {
        if (!pa->requires_grad) return;
        for (std::size_t i = 0; i < self->grad.size(); ++i)
            pa->grad[i] += self->grad[i] * dfdy(pa->data[i], self->data[i]);
    };
    return out;
}

}  // namespace

TensorPtr relu(const TensorPtr& a) {
    return unary_elementwise(
        "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

TensorPtr sigmoid(const TensorPtr& a) {
    return unary_elementwise(
        "sigmoid", a,
        [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                       : std::exp(x) / (1.0 + std::exp(x)); },
        [](double, double y) { return y * (1.0 - y); });
}

TensorPtr tanh_act(const TensorPtr& a) {
    return unary_elementwise(
        "tanh", a, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

TensorPtr softmax_rows(const TensorPtr& a) {
    require(a->shape.size() == 2, "softmax_rows: expected [T,K]");
    const int t_steps = a->shape[0], k = a->shape[1];
    auto out = make_node("softmax_rows", a->shape, {a});
    for (int t = 0; t < t_steps; ++t) {
        const double* in = a->data.data() + static_cast<std::size_t>(t) * k;
        double* o = out->data.data() + static_cast<std::size_t>(t) * k;
        double mx = in[0];
        for (int j = 1; j < k; ++j) mx = std::max(mx, in[j]);
        double z = 0.0;
        for (int j = 0; j < k; ++j) z += std::exp(in[j] - mx);
        for (int j = 0; j < k; ++j) o[j] = std::exp(in[j] - mx) / z;
    }
    Tensor* self = out.get();
    Tensor* pa = a.get();
    out->backward_fn = [self, pa, t_steps, k]() {
        if (!pa->requires_grad) return;
        for (int t = 0; t < t_steps; ++t) {
            const double* y = self->data.data() + static_cast<std::size_t>(t) * k;
            const double* g = self->grad.data() + static_cast<std::size_t>(t) * k;
            double dot = 0.0;
            for (int j = 0; j < k; ++j) dot += g[j] * y[j];
            double* ga = pa->grad.data() + static_cast<std::size_t>(t) * k;
            for (int j = 0; j < k; ++j) ga[j] += y[j] * (g[j] - dot);
        }
    };
    return out;
}

TensorPtr reshape(const TensorPtr& a, std::vector<int> shape) {
    require(shape_size(shape) == a->size(), "reshape: element count mismatch");
    auto out = make_node("reshape", std::move(shape), {a});
    out->data = a->data;
    Tensor* self = out.get();
    Tensor* pa = a.get();
    out->backward_fn = [self, pa]() {
        if (!pa->requires_grad) return;
        for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
    };
    return out;
}

TensorPtr flatten(const TensorPtr& a) { return reshape(a, {static_cast<int>(a->size())}); }

TensorPtr row(const TensorPtr& a, int index) {
    require(a->shape.size() == 2, "row: expected [T,K]");
    require(index >= 0 && index < a->shape[0], "row: index out of range");
    const int k = a->shape[1];
    auto out = make_node("row", {k}, {a});
    std::copy_n(a->data.data() + static_cast<std::size_t>(index) * k, k, out->data.data());
    Tensor* self = out.get();
    Tensor* pa = a.get();
    out->backward_fn = [self, pa, index, k]() {
        if (!pa->requires_grad) return;
        double* g = pa->grad.data() + static_cast<std::size_t>(index) * k;
        for (int j = 0; j < k; ++j) g[j] += self->grad[j];
    };
    return out;
}

TensorPtr take_rows(const TensorPtr& a, int count) {
    require(a->shape.size() == 2, "take_rows: expected [T,K]");
    require(count >= 1 && count <= a->shape[0], "take_rows: count out of range");
    const int k = a->shape[1];
    auto out = make_node("take_rows", {count, k}, {a});
    std::copy_n(a->data.begin(), static_cast<std::size_t>(count) * k, out->data.begin());
    Tensor* self = out.get();
    Tensor* pa = a.get();
    out->backward_fn = [self, pa]() {
        if (!pa->requires_grad) return;
        for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
    };
    return out;
}

TensorPtr concat(const TensorPtr& a, const TensorPtr& b) {
    require(a->shape.size() == 1 && b->shape.size() == 1, "concat: expected two vectors");
    const int n = a->shape[0], m = b->shape[0];
    auto out = make_node("concat", {n + m}, {a, b});
    std::copy(a->data.begin(), a->data.end(), out->data.begin());
    std::copy(b->data.begin(), b->data.end(), out->data.begin() + n);
    Tensor* self = out.get();
    Tensor *pa = a.get(), *pb = b.get();
    out->backward_fn = [self, pa, pb, n, m]() {
        if (pa->requires_grad)
            for (int i = 0; i < n; ++i) pa->grad[i] += self->grad[i];
        if (pb->requires_grad)
            for (int i = 0; i < m; ++i) pb->grad[i] += self->grad[n + i];
    };
    return out;
}

TensorPtr stack_rows(const std::vector<TensorPtr>& rows) {
    require(!rows.empty(), "stack_rows: empty row list");
    const int k = rows[0]->shape[0];
    for (const auto& r : rows)
        require(r->shape.size() == 1 && r->shape[0] == k, "stack_rows: ragged rows");
    const int t_steps = static_cast<int>(rows.size());
    auto out = make_node("stack_rows", {t_steps, k}, rows);
    for (int t = 0; t < t_steps; ++t)
        std::copy(rows[t]->data.begin(), rows[t]->data.end(),
                  out->data.begin() + static_cast<std::size_t>(t) * k);
    Tensor* self = out.get();
    out->backward_fn = [self, k]() {
        for (std::size_t t = 0; t < self->parents.size(); ++t) {
            Tensor* p = self->parents[t].get();
            if (!p->requires_grad) continue;
            const double* g = self->grad.data() + t * k;
            for (int j = 0; j < k; ++j) p->grad[j] += g[j];
        }
    };
    return out;
}

TensorPtr stack_channels(const TensorPtr& a, const TensorPtr& b) {
    require(a->shape.size() == 2 && a->shape == b->shape, "stack_channels: expected two equal [T,T]");
    const int h = a->shape[0], w = a->shape[1];
    auto out = make_node("stack_channels", {h, w, 2}, {a, b});
    for (std::size_t i = 0; i < a->data.size(); ++i) {
        out->data[2 * i] = a->data[i];
        out->data[2 * i + 1] = b->data[i];
    }
    Tensor* self = out.get();
    Tensor *pa = a.get(), *pb = b.get();
    out->backward_fn = [self, pa, pb]() {
        const std::size_t n = pa->data.size();
        if (pa->requires_grad)
            for (std::size_t i = 0; i < n; ++i) pa->grad[i] += self->grad[2 * i];
        if (pb->requires_grad)
            for (std::size_t i = 0; i < n; ++i) pb->grad[i] += self->grad[2 * i + 1];
    };
    return out;
}

TensorPtr columns_as_timesteps(const TensorPtr& a) {
    require(a->shape.size() == 3, "columns_as_timesteps: expected [H,W,C]");
    const int h = a->shape[0], w = a->shape[1], c = a->shape[2];
    auto out = make_node("columns_as_timesteps", {w, h * c}, {a});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch)
                out->data[static_cast<std::size_t>(x) * (h * c) + y * c + ch] =
                    a->data[(static_cast<std::size_t>(y) * w + x) * c + ch];
    Tensor* self = out.get();
    Tensor* pa = a.get();
    out->backward_fn = [self, pa, h, w, c]() {
        if (!pa->requires_grad) return;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int ch = 0; ch < c; ++ch)
                    pa->grad[(static_cast<std::size_t>(y) * w + x) * c + ch] +=
                        self->grad[static_cast<std::size_t>(x) * (h * c) + y * c + ch];
    };
    return out;
}

TensorPtr conv2d_same(const TensorPtr& input, const TensorPtr& kernels, const TensorPtr& bias) {
    require(input->shape.size() == 3, "conv2d_same: expected [H,W,Cin] input");
    require(kernels->shape.size() == 4 && kernels->shape[0] == 3 && kernels->shape[1] == 3,
            "conv2d_same: expected [3,3,Cin,Cout] kernels");
    require(kernels->shape[2] == input->shape[2], "conv2d_same: channel mismatch");
    require(bias->shape.size() == 1 && bias->shape[0] == kernels->shape[3],
            "conv2d_same: bias/kernel mismatch");
    const int h = input->shape[0], w = input->shape[1];
    const int ci = input->shape[2], co = kernels->shape[3];
    auto out = make_node("conv2d_same", {h, w, co}, {input, kernels, bias});

    const double* in = input->data.data();
    const double* kd = kernels->data.data();
    double* od = out->data.data();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double* op = od + (static_cast<std::size_t>(y) * w + x) * co;
            for (int o = 0; o < co; ++o) op[o] = bias->data[o];
            for (int dy = 0; dy < 3; ++dy) {
                const int yy = y + dy - 1;
                if (yy < 0 || yy >= h) continue;
                for (int dx = 0; dx < 3; ++dx) {
                    const int xx = x + dx - 1;
                    if (xx < 0 || xx >= w) continue;
                    const double* ip = in + (static_cast<std::size_t>(yy) * w + xx) * ci;
                    const double* kp = kd + (static_cast<std::size_t>(dy) * 3 + dx) * ci * co;
                    for (int i = 0; i < ci; ++i) {
                        const double iv = ip[i];
                        const double* kr = kp + static_cast<std::size_t>(i) * co;
                        for (int o = 0; o < co; ++o) op[o] += iv * kr[o];
                    }
                }
            }
        }

    Tensor* self = out.get();
    Tensor *pi = input.get(), *pk = kernels.get(), *pb = bias.get();
    out->backward_fn = [self, pi, pk, pb, h, w, ci, co]() {
        const double* g = self->grad.data();
        if (pb->requires_grad) {
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double* gp = g + (static_cast<std::size_t>(y) * w + x) * co;
                    for (int o = 0; o < co; ++o) pb->grad[o] += gp[o];
                }
        }
        const bool need_in = pi->requires_grad, need_k = pk->requires_grad;
        if (!need_in && !need_k) return;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double* gp = g + (static_cast<std::size_t>(y) * w + x) * co;
                for (int dy = 0; dy < 3; ++dy) {
                    const int yy = y + dy - 1;
                    if (yy < 0 || yy >= h) continue;
                    for (int dx = 0; dx < 3; ++dx) {
                        const int xx = x + dx - 1;
                        if (xx < 0 || xx >= w) continue;
                        const std::size_t in_off = (static_cast<std::size_t>(yy) * w + xx) * ci;
                        const std::size_t k_off = (static_cast<std::size_t>(dy) * 3 + dx) * ci * co;
                        if (need_k) {
                            const double* ip = pi->data.data() + in_off;
                            for (int i = 0; i < ci; ++i) {
                                const double iv = ip[i];
                                double* gk = pk->grad.data() + k_off + static_cast<std::size_t>(i) * co;
                                for (int o = 0; o < co; ++o) gk[o] += iv * gp[o];
                            }
                        }
                        if (need_in) {
                            double* gi = pi->grad.data() + in_off;
                            const double* kp = pk->data.data() + k_off;
                            for (int i = 0; i < ci; ++i) {
                                const double* kr = kp + static_cast<std::size_t>(i) * co;
                                double acc = 0.0;
                                for (int o = 0; o < co; ++o) acc += kr[o] * gp[o];
                                gi[i] += acc;
                            }
                        }
                    }
                }
            }
    };
    return out;
}

TensorPtr maxpool2x2(const TensorPtr& input) {
    require(input->shape.size() == 3, "maxpool2x2: expected [H,W,C]");
    const int h = input->shape[0], w = input->shape[1], c = input->shape[2];
    if (h % 2 != 0 || w % 2 != 0) throw DimensionError("maxpool2x2: H and W must be even");
    const int oh = h / 2, ow = w / 2;
    auto out = make_node("maxpool2x2", {oh, ow, c}, {input});
    std::vector<std::size_t> argmax(out->data.size());
    const double* in = input->data.data();
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int ch = 0; ch < c; ++ch) {
                double best = kNegInf;
                std::size_t best_idx = 0;
                // Row-major window scan; strict > keeps the first max on ties.
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const std::size_t idx =
                            (static_cast<std::size_t>(2 * y + dy) * w + (2 * x + dx)) * c + ch;
                        if (in[idx] > best) {
                            best = in[idx];
                            best_idx = idx;
                        }
                    }
                const std::size_t oidx = (static_cast<std::size_t>(y) * ow + x) * c + ch;
                out->data[oidx] = best;
                argmax[oidx] = best_idx;
            }
    Tensor* self = out.get();
    Tensor* pi = input.get();
    out->backward_fn = [self, pi, argmax = std::move(argmax)]() {
        if (!pi->requires_grad) return;
        for (std::size_t i = 0; i < self->grad.size(); ++i) pi->grad[argmax[i]] += self->grad[i];
    };
    return out;
}

TensorPtr dropout(const TensorPtr& input, double rate, bool training, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw ArgumentError("dropout: rate must be in [0,1)");
    if (!training || rate == 0.0) {
        auto out = make_node("dropout", input->shape, {input});
        out->data = input->data;
        Tensor* self = out.get();
        Tensor* pi = input.get();
        out->backward_fn = [self, pi]() {
            if (!pi->requires_grad) return;
            for (std::size_t i = 0; i < self->grad.size(); ++i) pi->grad[i] += self->grad[i];
        };
        return out;
    }
    auto out = make_node("dropout", input->shape, {input});
    std::vector<double> mask(input->data.size());
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = rng.uniform() < rate ? 0.0 : keep_scale;
        out->data[i] = input->data[i] * mask[i];
    }
    Tensor* self = out.get();
    Tensor* pi = input.get();
    out->backward_fn = [self, pi, mask = std::move(mask)]() {
        if (!pi->requires_grad) return;
        for (std::size_t i = 0; i < self->grad.size(); ++i)
            pi->grad[i] += self->grad[i] * mask[i];
    };
    return out;
}

TensorPtr bce_loss(const TensorPtr& prediction, double label) {
    require(prediction->size() == 1, "bce_loss: prediction must be scalar");
    if (label != 0.0 && label != 1.0) throw ArgumentError("bce_loss: label must be 0 or 1");
    constexpr double kEps = 1e-7;
    const double p = prediction->data[0];
    const double pc = std::clamp(p, kEps, 1.0 - kEps);
    auto out = make_node("bce_loss", {1}, {prediction});
    out->data[0] = -(label * std::log(pc) + (1.0 - label) * std::log(1.0 - pc));
    Tensor* self = out.get();
    Tensor* pp = prediction.get();
    const bool clamped = (p != pc);
    out->backward_fn = [self, pp, label, pc, clamped]() {
        if (!pp->requires_grad || clamped) return;
        pp->grad[0] += self->grad[0] * (-label / pc + (1.0 - label) / (1.0 - pc));
    };
    return out;
}

TensorPtr blank_tail_loss(const TensorPtr& logits, int from_row) {
    require(logits->shape.size() == 2, "blank_tail_loss: expected [T,K]");
    const int t_steps = logits->shape[0], k = logits->shape[1];
    require(from_row >= 0 && from_row <= t_steps, "blank_tail_loss: row out of range");
    const int blank = k - 1;
    auto out = make_node("blank_tail_loss", {1}, {logits});
    std::vector<double> lsm(static_cast<std::size_t>(t_steps - from_row) * k);
    double total = 0.0;
    for (int t = from_row; t < t_steps; ++t) {
        const double* in = logits->data.data() + static_cast<std::size_t>(t) * k;
        double mx = in[0];
        for (int j = 1; j < k; ++j) mx = std::max(mx, in[j]);
        double z = 0.0;
        for (int j = 0; j < k; ++j) z += std::exp(in[j] - mx);
        const double logz = mx + std::log(z);
        for (int j = 0; j < k; ++j)
            lsm[static_cast<std::size_t>(t - from_row) * k + j] = in[j] - logz;
        total -= in[blank] - logz;
    }
    out->data[0] = total;
    Tensor* self = out.get();
    Tensor* pl = logits.get();
    out->backward_fn = [self, pl, from_row, t_steps, k, blank, lsm = std::move(lsm)]() {
        if (!pl->requires_grad) return;
        const double g = self->grad[0];
        for (int t = from_row; t < t_steps; ++t) {
            double* gl = pl->grad.data() + static_cast<std::size_t>(t) * k;
            const double* row = lsm.data() + static_cast<std::size_t>(t - from_row) * k;
            for (int j = 0; j < k; ++j)
                gl[j] += g * (std::exp(row[j]) - (j == blank ? 1.0 : 0.0));
        }
    };
    return out;
}

int count_adjacent_repeats(const std::vector<int>& target) {
    int repeats = 0;
    for (std::size_t i = 1; i < target.size(); ++i)
        if (target[i] == target[i - 1]) ++repeats;
    return repeats;
}

bool ctc_feasible(int time_steps, int target_len, int adjacent_repeats) {
    return time_steps >= target_len + adjacent_repeats;
}

TensorPtr ctc_loss(const TensorPtr& logits, const std::vector<int>& target) {
    require(logits->shape.size() == 2, "ctc_loss: expected [T,K] logits");
    const int t_steps = logits->shape[0];
    const int k = logits->shape[1];
    const int blank = k - 1;
    for (int c : target) {
        if (c < 0 || c >= blank) throw ArgumentError("ctc_loss: target index out of alphabet");
    }
    const int len = static_cast<int>(target.size());
    if (!ctc_feasible(t_steps, len, count_adjacent_repeats(target)))
        throw FeasibilityError("ctc_loss: target too long for the available time steps");

    // Extended label sequence: blanks interleaved around every symbol.
    const int s_len = 2 * len + 1;
    std::vector<int> lab(s_len, blank);
    for (int i = 0; i < len; ++i) lab[2 * i + 1] = target[i];

    // Row-wise log-softmax.
    std::vector<double> lsm(static_cast<std::size_t>(t_steps) * k);
    for (int t = 0; t < t_steps; ++t) {
        const double* in = logits->data.data() + static_cast<std::size_t>(t) * k;
        double mx = in[0];
        for (int j = 1; j < k; ++j) mx = std::max(mx, in[j]);
        double z = 0.0;
        for (int j = 0; j < k; ++j) z += std::exp(in[j] - mx);
        const double logz = mx + std::log(z);
        for (int j = 0; j < k; ++j) lsm[static_cast<std::size_t>(t) * k + j] = in[j] - logz;
    }

    // Forward variables in log space.
    std::vector<double> alpha(static_cast<std::size_t>(t_steps) * s_len, kNegInf);
    alpha[0] = lsm[static_cast<std::size_t>(0) * k + lab[0]];
    if (s_len > 1) alpha[1] = lsm[static_cast<std::size_t>(0) * k + lab[1]];
    for (int t = 1; t < t_steps; ++t) {
        const double* prev = alpha.data() + static_cast<std::size_t>(t - 1) * s_len;
        double* cur = alpha.data() + static_cast<std::size_t>(t) * s_len;
        for (int s = 0; s < s_len; ++s) {
            double acc = prev[s];
            if (s >= 1) acc = log_sum_exp2(acc, prev[s - 1]);
            if (s >= 2 && lab[s] != blank && lab[s] != lab[s - 2])
                acc = log_sum_exp2(acc, prev[s - 2]);
            cur[s] = (acc == kNegInf)
                         ? kNegInf
                         : acc + lsm[static_cast<std::size_t>(t) * k + lab[s]];
        }
    }
    double log_p = alpha[static_cast<std::size_t>(t_steps - 1) * s_len + s_len - 1];
    if (s_len > 1)
        log_p = log_sum_exp2(log_p,
                             alpha[static_cast<std::size_t>(t_steps - 1) * s_len + s_len - 2]);

    auto out = make_node("ctc_loss", {1}, {logits});
    out->data[0] = -log_p;

    Tensor* self = out.get();
    Tensor* pl = logits.get();
    out->backward_fn = [self, pl, t_steps, k, blank, s_len, lab = std::move(lab),
                        lsm = std::move(lsm), alpha = std::move(alpha), log_p]() {
        if (!pl->requires_grad) return;
        // Backward variables, emission included at t (mirror of alpha).
        std::vector<double> beta(static_cast<std::size_t>(t_steps) * s_len, kNegInf);
        {
            double* last = beta.data() + static_cast<std::size_t>(t_steps - 1) * s_len;
            last[s_len - 1] = lsm[static_cast<std::size_t>(t_steps - 1) * k + lab[s_len - 1]];
            if (s_len > 1)
                last[s_len - 2] = lsm[static_cast<std::size_t>(t_steps - 1) * k + lab[s_len - 2]];
        }
        for (int t = t_steps - 2; t >= 0; --t) {
            const double* nxt = beta.data() + static_cast<std::size_t>(t + 1) * s_len;
            double* cur = beta.data() + static_cast<std::size_t>(t) * s_len;
            for (int s = 0; s < s_len; ++s) {
                double acc = nxt[s];
                if (s + 1 < s_len) acc = log_sum_exp2(acc, nxt[s + 1]);
                if (s + 2 < s_len && lab[s + 2] != blank && lab[s + 2] != lab[s])
                    acc = log_sum_exp2(acc, nxt[s + 2]);
                cur[s] = (acc == kNegInf)
                             ? kNegInf
                             : acc + lsm[static_cast<std::size_t>(t) * k + lab[s]];
            }
        }
        // dL/dlogit[t][c] = softmax - posterior occupancy of c at t.
        const double g = self->grad[0];
        for (int t = 0; t < t_steps; ++t) {
            std::vector<double> log_gamma(static_cast<std::size_t>(k), kNegInf);
            for (int s = 0; s < s_len; ++s) {
                const double la = alpha[static_cast<std::size_t>(t) * s_len + s];
                const double lb = beta[static_cast<std::size_t>(t) * s_len + s];
                if (la == kNegInf || lb == kNegInf) continue;
                const int c = lab[s];
                const double term = la + lb - lsm[static_cast<std::size_t>(t) * k + c];
                log_gamma[c] = log_sum_exp2(log_gamma[c], term);
            }
            double* gl = pl->grad.data() + static_cast<std::size_t>(t) * k;
            for (int c = 0; c < k; ++c) {
                const double y = std::exp(lsm[static_cast<std::size_t>(t) * k + c]);
                const double gamma =
                    (log_gamma[c] == kNegInf) ? 0.0 : std::exp(log_gamma[c] - log_p);
                gl[c] += g * (y - gamma);
            }
        }
    };
    return out;
}

}  // namespace inkcheck::nn
