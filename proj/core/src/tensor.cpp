#include "inkcheck/tensor.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

namespace inkcheck::nn {

std::int64_t shape_size(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw DimensionError("non-positive dimension in shape");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> s, bool req_grad)
    : shape(std::move(s)), requires_grad(req_grad) {
    const auto n = static_cast<std::size_t>(shape_size(shape));
    data.assign(n, 0.0);
    if (requires_grad) grad.assign(n, 0.0);
}

double& Tensor::at(int i) {
    if (shape.size() != 1) throw DimensionError("at(i) on non rank-1 tensor");
    return data[static_cast<std::size_t>(i)];
}

double& Tensor::at(int i, int j) {
    if (shape.size() != 2) throw DimensionError("at(i,j) on non rank-2 tensor");
    return data[static_cast<std::size_t>(i) * shape[1] + j];
}

double& Tensor::at(int i, int j, int k) {
    if (shape.size() != 3) throw DimensionError("at(i,j,k) on non rank-3 tensor");
    return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
}

void Tensor::zero_grad() {
    if (requires_grad) grad.assign(data.size(), 0.0);
}

TensorPtr Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    return std::make_shared<Tensor>(std::move(shape), requires_grad);
}

TensorPtr Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
    auto t = zeros(std::move(shape), requires_grad);
    for (auto& v : t->data) v = value;
    return t;
}

TensorPtr Tensor::from(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
    auto t = std::make_shared<Tensor>(std::move(shape), requires_grad);
    if (values.size() != t->data.size())
        throw DimensionError("value count does not match shape");
    t->data = std::move(values);
    return t;
}

TensorPtr Tensor::glorot(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
    auto t = zeros(std::move(shape), true);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : t->data) v = rng.uniform(-limit, limit);
    return t;
}

TensorPtr make_node(const char* op, std::vector<int> shape, std::vector<TensorPtr> parents) {
    bool req = false;
    for (const auto& p : parents) req = req || p->requires_grad;
    auto t = std::make_shared<Tensor>(std::move(shape), req);
    t->op = op;
    t->parents = std::move(parents);
    return t;
}

namespace {

// Iterative post-order DFS; recursion would overflow on long unrolled
// recurrent graphs.
std::vector<Tensor*> topo_order(Tensor* root) {
    std::vector<Tensor*> order;
    std::unordered_set<Tensor*> visited;
    std::vector<std::pair<Tensor*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            Tensor* child = node->parents[next_child++].get();
            if (visited.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

}  // namespace

void backward(const TensorPtr& root, double seed) {
    if (root->size() != 1) throw DimensionError("backward requires a scalar root");
    if (!root->requires_grad) return;
    root->grad[0] += seed;
    auto order = topo_order(root.get());
    // Post-order puts the root last; walk it in reverse.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Tensor* node = *it;
        if (!node->requires_grad || !node->backward_fn) continue;
        node->backward_fn();
        for (const auto& parent : node->parents) {
            if (!parent->requires_grad) continue;
            for (double g : parent->grad) {
                if (!std::isfinite(g))
                    throw NumericError(std::string("non-finite gradient produced by op '") +
                                       node->op + "'");
            }
        }
    }
}

void assert_finite(const Tensor& t, const std::string& what) {
    for (double v : t.data) {
        if (!std::isfinite(v)) throw NumericError("non-finite value in " + what);
    }
}

}  // namespace inkcheck::nn
