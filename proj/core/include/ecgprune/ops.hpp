#pragma once

#include <cstdint>
#include <vector>

#include "ecgprune/tensor.hpp"

namespace ecgprune {

// floor((len - k) / stride) + 1; the valid (no-padding) output length shared
// by conv and pool. Throws ShapeError when len < k.
std::int64_t conv_output_length(std::int64_t len, std::int64_t k, std::int64_t stride);

// Valid cross-correlation. input [in_ch, len], weight [out_ch, in_ch, k],
// bias [out_ch] -> [out_ch, out_len]. Bias is added per output channel.
Tensor conv1d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias,
                      std::int64_t stride);

struct Conv1dGrads {
  Tensor dinput;  // empty when not requested
  Tensor dweight;
  Tensor dbias;
};
Conv1dGrads conv1d_backward(const Tensor& input, const Tensor& weight, std::int64_t stride,
                            const Tensor& dout, bool need_dinput);

// Elementwise max(x, 0).
Tensor relu_forward(const Tensor& x);
// Subgradient 0 at x == 0.
Tensor relu_backward(const Tensor& x, const Tensor& dout);

struct Pool1dResult {
  Tensor output;                     // [ch, out_len]
  std::vector<std::int64_t> argmax;  // flat input index per output element
};
// Max over each window; incomplete trailing windows are dropped. Ties go to
// the first (lowest) index in the window.
Pool1dResult maxpool1d_forward(const Tensor& x, std::int64_t k, std::int64_t stride);
Tensor maxpool1d_backward(const std::vector<std::int64_t>& input_shape,
                          const std::vector<std::int64_t>& argmax, const Tensor& dout);

// weight [m, n] times x [n] plus bias [m] -> [m].
Tensor dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct DenseGrads {
  Tensor dinput;  // empty when not requested
  Tensor dweight;
  Tensor dbias;
};
DenseGrads dense_backward(const Tensor& x, const Tensor& weight, const Tensor& dout,
                          bool need_dinput);

// Max-subtracted softmax over a rank-1 tensor.
Tensor softmax(const Tensor& logits);

struct SoftmaxLoss {
  double loss = 0.0;
  Tensor probs;
};
// Max-subtracted softmax; the loss is computed through log-sum-exp so extreme
// logits cannot overflow into inf/NaN.
SoftmaxLoss softmax_cross_entropy(const Tensor& logits, int label);
// d(loss)/d(logits) = probs - onehot(label).
Tensor softmax_cross_entropy_backward(const Tensor& probs, int label);

}  // namespace ecgprune
