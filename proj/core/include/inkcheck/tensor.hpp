#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "inkcheck/errors.hpp"
#include "inkcheck/rng.hpp"

namespace inkcheck::nn {

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

std::int64_t shape_size(const std::vector<int>& shape);

// Dense n-d array of doubles with an optional gradient buffer and the
// bookkeeping needed for reverse-mode differentiation. Nodes form a DAG;
// `backward_fn` accumulates into the parents' grad buffers.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;  // same length as data when requires_grad
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<TensorPtr> parents;
    std::function<void()> backward_fn;

    Tensor(std::vector<int> s, bool req_grad);

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    // Rank-checked element access used on cold paths; hot loops index data directly.
    double& at(int i);
    double& at(int i, int j);
    double& at(int i, int j, int k);
    double at(int i) const { return const_cast<Tensor*>(this)->at(i); }
    double at(int i, int j) const { return const_cast<Tensor*>(this)->at(i, j); }
    double at(int i, int j, int k) const { return const_cast<Tensor*>(this)->at(i, j, k); }

    void zero_grad();

    static TensorPtr zeros(std::vector<int> shape, bool requires_grad = false);
    static TensorPtr full(std::vector<int> shape, double value, bool requires_grad = false);
    static TensorPtr from(std::vector<int> shape, std::vector<double> values,
                          bool requires_grad = false);
    // Glorot-uniform initialized parameter tensor.
    static TensorPtr glorot(std::vector<int> shape, int fan_in, int fan_out, Rng& rng);
};

// Allocates a node whose requires_grad is inherited from its parents.
TensorPtr make_node(const char* op, std::vector<int> shape, std::vector<TensorPtr> parents);

// Reverse-mode accumulation from a scalar root. `seed` is the upstream
// gradient (use 1/batch_size to form a mean over per-example losses).
// Deterministic given an identical forward graph. Throws NumericError,
// naming the offending op, if a non-finite gradient shows up.
void backward(const TensorPtr& root, double seed = 1.0);

// Throws NumericError mentioning `what` if any value is NaN/Inf.
void assert_finite(const Tensor& t, const std::string& what);

}  // namespace inkcheck::nn
