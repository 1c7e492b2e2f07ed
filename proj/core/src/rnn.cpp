#include "inkcheck/rnn.hpp"

namespace inkcheck::nn {

GruParams GruParams::init(int input_dim, int hidden, Rng& rng) {
    GruParams p;
    p.wz = Tensor::glorot({input_dim, hidden}, input_dim, hidden, rng);
    p.uz = Tensor::glorot({hidden, hidden}, hidden, hidden, rng);
    p.bz = Tensor::zeros({hidden}, true);
    p.wr = Tensor::glorot({input_dim, hidden}, input_dim, hidden, rng);
    p.ur = Tensor::glorot({hidden, hidden}, hidden, hidden, rng);
    p.br = Tensor::zeros({hidden}, true);
    p.wc = Tensor::glorot({input_dim, hidden}, input_dim, hidden, rng);
    p.uc = Tensor::glorot({hidden, hidden}, hidden, hidden, rng);
    p.bc = Tensor::zeros({hidden}, true);
    return p;
}

std::vector<TensorPtr> GruParams::parameters() const {
    return {wz, uz, bz, wr, ur, br, wc, uc, bc};
}

std::vector<TensorPtr> gru_unroll(const TensorPtr& input, const GruParams& p, int hidden,
                                  bool reversed) {
    const int t_steps = input->shape[0];
    std::vector<TensorPtr> outputs(static_cast<std::size_t>(t_steps));
    TensorPtr h = Tensor::zeros({hidden});
    for (int step = 0; step < t_steps; ++step) {
        const int t = reversed ? t_steps - 1 - step : step;
        auto x = row(input, t);
        auto z = sigmoid(add(add(matvec(x, p.wz), matvec(h, p.uz)), p.bz));
        auto r = sigmoid(add(add(matvec(x, p.wr), matvec(h, p.ur)), p.br));
        auto c = tanh_act(add(add(matvec(x, p.wc), matvec(mul(r, h), p.uc)), p.bc));
        h = add(h, mul(z, sub(c, h)));
        outputs[static_cast<std::size_t>(t)] = h;
    }
    return outputs;
}

TensorPtr bidirectional_recurrent(const TensorPtr& input, const GruParams& forward,
                                  const GruParams& backward, int hidden) {
    if (input->shape.size() != 2) throw DimensionError("bidirectional_recurrent: expected [T,F]");
    if (input->shape[0] < 1) throw ArgumentError("bidirectional_recurrent: empty sequence");
    auto fwd = gru_unroll(input, forward, hidden, false);
    auto bwd = gru_unroll(input, backward, hidden, true);
    std::vector<TensorPtr> rows(fwd.size());
    for (std::size_t t = 0; t < fwd.size(); ++t) rows[t] = concat(fwd[t], bwd[t]);
    return stack_rows(rows);
}

}  // namespace inkcheck::nn
