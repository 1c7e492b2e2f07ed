#include "inkcheck/optim.hpp"

#include <cmath>

namespace inkcheck::nn {

OptimizerState OptimizerState::init(const std::vector<TensorPtr>& params, double learning_rate,
                                    double decay_rho, double epsilon) {
    if (learning_rate <= 0.0) throw ArgumentError("rmsprop: learning rate must be positive");
    if (decay_rho <= 0.0 || decay_rho >= 1.0) throw ArgumentError("rmsprop: rho must be in (0,1)");
    OptimizerState s;
    s.learning_rate = learning_rate;
    s.decay_rho = decay_rho;
    s.epsilon = epsilon;
    s.accumulators.reserve(params.size());
    for (const auto& p : params) s.accumulators.emplace_back(p->data.size(), 0.0);
    return s;
}

void rmsprop_step(const std::vector<TensorPtr>& params, OptimizerState& state) {
    if (params.size() != state.accumulators.size())
        throw ArgumentError("rmsprop: state does not match parameter list");
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        auto& acc = state.accumulators[i];
        for (std::size_t j = 0; j < p.data.size(); ++j) {
            const double g = p.grad[j];
            acc[j] = state.decay_rho * acc[j] + (1.0 - state.decay_rho) * g * g;
            p.data[j] -= state.learning_rate * g / (std::sqrt(acc[j]) + state.epsilon);
        }
    }
}

void zero_grads(const std::vector<TensorPtr>& params) {
    for (const auto& p : params) p->zero_grad();
}

double geometric_lr(double lr_start, double lr_end, int epoch, int epochs) {
    if (epochs <= 1) return lr_start;
    const double f = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
    return lr_start * std::pow(lr_end / lr_start, f);
}

}  // namespace inkcheck::nn
