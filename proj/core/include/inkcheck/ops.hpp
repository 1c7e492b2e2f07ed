#pragma once

#include <vector>

#include "inkcheck/tensor.hpp"

namespace inkcheck::nn {

// Elementwise / linear algebra ----------------------------------------------

TensorPtr add(const TensorPtr& a, const TensorPtr& b);           // same shape
TensorPtr sub(const TensorPtr& a, const TensorPtr& b);           // same shape
TensorPtr mul(const TensorPtr& a, const TensorPtr& b);           // Hadamard
TensorPtr scale(const TensorPtr& a, double s);
TensorPtr add_rowwise(const TensorPtr& x, const TensorPtr& bias);  // [T,K] + [K]
TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);        // [m,k]x[k,n]
TensorPtr matvec(const TensorPtr& x, const TensorPtr& w);        // [k]x[k,n] -> [n]
TensorPtr sum(const TensorPtr& a);                               // -> [1]

// out = x.w + b for a single feature vector.
TensorPtr dense(const TensorPtr& x, const TensorPtr& weights, const TensorPtr& bias);

// Applies the same dense map to each row of a [T,D] input; weights are
// shared across the T steps.
TensorPtr time_distributed_dense(const TensorPtr& x, const TensorPtr& weights,
                                 const TensorPtr& bias);

// Activations ----------------------------------------------------------------

TensorPtr relu(const TensorPtr& a);
TensorPtr sigmoid(const TensorPtr& a);
TensorPtr tanh_act(const TensorPtr& a);
TensorPtr softmax_rows(const TensorPtr& a);  // [T,K], row-wise

// Structural -----------------------------------------------------------------

TensorPtr reshape(const TensorPtr& a, std::vector<int> shape);
TensorPtr flatten(const TensorPtr& a);
TensorPtr row(const TensorPtr& a, int index);                    // [T,K] -> [K]
TensorPtr take_rows(const TensorPtr& a, int count);              // [T,K] -> [count,K]
TensorPtr concat(const TensorPtr& a, const TensorPtr& b);        // [n]+[m] -> [n+m]
TensorPtr stack_rows(const std::vector<TensorPtr>& rows);        // T x [K] -> [T,K]
TensorPtr stack_channels(const TensorPtr& a, const TensorPtr& b);  // 2 x [T,T] -> [T,T,2]

// Turns conv output [H,W,C] into a sequence [W, H*C]: one feature vector
// per image column, left to right.
TensorPtr columns_as_timesteps(const TensorPtr& a);

// Convolution / pooling ------------------------------------------------------

// 3x3 convolution, stride 1, zero padding of 1: output spatial dims equal
// input dims. input [H,W,Cin], kernels [3,3,Cin,Cout], bias [Cout].
TensorPtr conv2d_same(const TensorPtr& input, const TensorPtr& kernels, const TensorPtr& bias);

// Disjoint 2x2 max windows; requires even H and W. Gradient goes to the
// argmax cell, ties broken toward the first element in row-major order.
TensorPtr maxpool2x2(const TensorPtr& input);

// Regularization -------------------------------------------------------------

// Training mode zeroes each element with probability `rate` and scales the
// survivors by 1/(1-rate); inference mode is the identity.
TensorPtr dropout(const TensorPtr& input, double rate, bool training, Rng& rng);

// Losses ---------------------------------------------------------------------

// Binary cross-entropy of a scalar prediction in (0,1) against label 0/1.
// The prediction is clamped to [1e-7, 1-1e-7] before the logs.
TensorPtr bce_loss(const TensorPtr& prediction, double label);

// CTC negative log-likelihood of `target` (class indices; the last class
// index of the logits row is the blank) over all blank-augmented
// alignments. Forward dynamic program over the 2L+1 extended sequence,
// in log space. Throws FeasibilityError if the target cannot fit in T.
TensorPtr ctc_loss(const TensorPtr& logits, const std::vector<int>& target);

// Sum over rows >= from_row of -log softmax(row)[blank], blank being the
// last class. Together with ctc_loss over the first rows this implements
// CTC under an output-delay constraint: every alignment must finish before
// `from_row` and the tail stays blank.
TensorPtr blank_tail_loss(const TensorPtr& logits, int from_row);

// True if the CTC alignment of `target_len` symbols with `adjacent_repeats`
// equal neighbours fits into `time_steps` frames.
bool ctc_feasible(int time_steps, int target_len, int adjacent_repeats);
int count_adjacent_repeats(const std::vector<int>& target);

}  // namespace inkcheck::nn
