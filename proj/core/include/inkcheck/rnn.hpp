#pragma once

#include "inkcheck/ops.hpp"

namespace inkcheck::nn {

// One direction of a gated recurrent cell (2-gate GRU):
//   z_t = sigmoid(x_t.Wz + h.Uz + bz)        update gate
//   r_t = sigmoid(x_t.Wr + h.Ur + br)        reset gate
//   c_t = tanh(x_t.Wc + (r_t*h).Uc + bc)     candidate
//   h_t = h + z_t * (c_t - h)
struct GruParams {
    TensorPtr wz, uz, bz;
    TensorPtr wr, ur, br;
    TensorPtr wc, uc, bc;

    static GruParams init(int input_dim, int hidden, Rng& rng);
    std::vector<TensorPtr> parameters() const;
};

// Single-direction unroll over a [T,F] sequence; returns [T,H] hidden states.
// `reversed` runs right-to-left, with outputs written back in input order.
std::vector<TensorPtr> gru_unroll(const TensorPtr& input, const GruParams& p, int hidden,
                                  bool reversed);

// Bidirectional recurrent block: forward pass left-to-right, backward pass
// right-to-left, per-timestep outputs concatenated into [T, 2*hidden].
// Throws ArgumentError on an empty sequence.
TensorPtr bidirectional_recurrent(const TensorPtr& input, const GruParams& forward,
                                  const GruParams& backward, int hidden);

}  // namespace inkcheck::nn
