#pragma once

#include <vector>

#include "inkcheck/tensor.hpp"

namespace inkcheck::nn {

// RMSprop running state: one mean-squared-gradient accumulator per
// trainable parameter, in parameter-list order.
struct OptimizerState {
    double learning_rate = 1e-3;
    double decay_rho = 0.9;
    double epsilon = 1e-7;
    std::vector<std::vector<double>> accumulators;

    static OptimizerState init(const std::vector<TensorPtr>& params, double learning_rate,
                               double decay_rho = 0.9, double epsilon = 1e-7);
};

// acc <- rho*acc + (1-rho)*g^2 ; param <- param - lr*g/(sqrt(acc)+eps).
// Reads each param's grad buffer; does not clear it.
void rmsprop_step(const std::vector<TensorPtr>& params, OptimizerState& state);

void zero_grads(const std::vector<TensorPtr>& params);

// Geometric per-epoch decay from lr_start to lr_end across `epochs` steps.
double geometric_lr(double lr_start, double lr_end, int epoch, int epochs);

// Knobs for one training run.
struct TrainSchedule {
    int epochs = 40;
    int batch_size = 32;
    double lr_start = 1e-3;
    double lr_end = 4e-5;
    int patience = 8;             // early stopping, in epochs without improvement
    std::uint64_t seed = 0;       // shuffling + weight init
    // Recognizer only: when >= 0, the CTC loss is restricted to the first
    // len+repeats+margin timesteps (an output-delay constraint). Emissions
    // then land at character-index-aligned timesteps, which is what gives
    // recognition features their spatial correlation with text position.
    int ctc_window_margin = -1;
    double ctc_tail_weight = 0.3;
};

}  // namespace inkcheck::nn
