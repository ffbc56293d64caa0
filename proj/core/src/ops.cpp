#include "ecgprune/ops.hpp"

#include <cmath>

#include "ecgprune/errors.hpp"

namespace ecgprune {

std::int64_t conv_output_length(std::int64_t len, std::int64_t k, std::int64_t stride) {
  if (stride < 1) throw ConfigError("stride must be >= 1, got " + std::to_string(stride));
  if (k < 1) throw ConfigError("window must be >= 1, got " + std::to_string(k));
  if (len < k) {
    throw ShapeError("input length " + std::to_string(len) + " shorter than window " +
                     std::to_string(k));
  }
  return (len - k) / stride + 1;
}

Tensor conv1d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias,
                      std::int64_t stride) {
  if (input.rank() != 2 || weight.rank() != 3 || bias.rank() != 1) {
    throw ShapeError("conv1d expects input [in_ch,len], weight [out_ch,in_ch,k], bias "
                     "[out_ch]; got " + shape_string(input) + ", " + shape_string(weight) +
                     ", " + shape_string(bias));
  }
  const std::int64_t in_ch = input.dim(0), len = input.dim(1);
  const std::int64_t out_ch = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != in_ch) {
    throw ShapeError("conv1d channel mismatch: weight " + shape_string(weight) +
                     " vs input " + shape_string(input));
  }
  if (bias.dim(0) != out_ch) {
    throw ShapeError("conv1d bias " + shape_string(bias) + " vs weight " + shape_string(weight));
  }
  const std::int64_t out_len = conv_output_length(len, k, stride);

  Tensor out({out_ch, out_len});
  const double* x = input.data();
  const double* w = weight.data();
  double* y = out.data();
  for (std::int64_t oc = 0; oc < out_ch; ++oc) {
    const double b = bias[oc];
    for (std::int64_t t = 0; t < out_len; ++t) {
      double acc = b;
      const std::int64_t x0 = t * stride;
      for (std::int64_t ic = 0; ic < in_ch; ++ic) {
        const double* xr = x + ic * len + x0;
        const double* wr = w + (oc * in_ch + ic) * k;
        for (std::int64_t kk = 0; kk < k; ++kk) acc += wr[kk] * xr[kk];
      }
      y[oc * out_len + t] = acc;
    }
  }
  return out;
}

Conv1dGrads conv1d_backward(const Tensor& input, const Tensor& weight, std::int64_t stride,
                            const Tensor& dout, bool need_dinput) {
  const std::int64_t in_ch = input.dim(0), len = input.dim(1);
  const std::int64_t out_ch = weight.dim(0), k = weight.dim(2);
  const std::int64_t out_len = dout.dim(1);

  Conv1dGrads g;
  g.dweight = Tensor::zeros(weight.shape());
  g.dbias = Tensor::zeros({out_ch});
  const double* x = input.data();
  const double* w = weight.data();
  const double* dy = dout.data();

  for (std::int64_t oc = 0; oc < out_ch; ++oc) {
    const double* dyr = dy + oc * out_len;
    double acc = 0.0;
    for (std::int64_t t = 0; t < out_len; ++t) acc += dyr[t];
    g.dbias[oc] = acc;

    for (std::int64_t ic = 0; ic < in_ch; ++ic) {
      const double* xr = x + ic * len;
      double* dwr = g.dweight.data() + (oc * in_ch + ic) * k;
      for (std::int64_t kk = 0; kk < k; ++kk) {
        double s = 0.0;
        for (std::int64_t t = 0; t < out_len; ++t) s += dyr[t] * xr[t * stride + kk];
        dwr[kk] = s;
      }
    }
  }

  if (need_dinput) {
    g.dinput = Tensor::zeros(input.shape());
    double* dx = g.dinput.data();
    for (std::int64_t oc = 0; oc < out_ch; ++oc) {
      const double* dyr = dy + oc * out_len;
      for (std::int64_t t = 0; t < out_len; ++t) {
        const double d = dyr[t];
        const std::int64_t x0 = t * stride;
        for (std::int64_t ic = 0; ic < in_ch; ++ic) {
          double* dxr = dx + ic * len + x0;
          const double* wr = w + (oc * in_ch + ic) * k;
          for (std::int64_t kk = 0; kk < k; ++kk) dxr[kk] += d * wr[kk];
        }
      }
    }
  }
  return g;
}

Tensor relu_forward(const Tensor& x) {
  Tensor y = x;
  double* d = y.data();
  for (std::int64_t i = 0; i < y.numel(); ++i) d[i] = d[i] > 0.0 ? d[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dout) {
  if (!x.same_shape(dout)) {
    throw ShapeError("relu backward shape mismatch: " + shape_string(x) + " vs " +
                     shape_string(dout));
  }
  Tensor dx = dout;
  const double* xv = x.data();
  double* d = dx.data();
  for (std::int64_t i = 0; i < dx.numel(); ++i) {
    if (xv[i] <= 0.0) d[i] = 0.0;
  }
  return dx;
}

Pool1dResult maxpool1d_forward(const Tensor& x, std::int64_t k, std::int64_t stride) {
  if (x.rank() != 2) throw ShapeError("maxpool1d expects [ch,len], got " + shape_string(x));
  const std::int64_t ch = x.dim(0), len = x.dim(1);
  const std::int64_t out_len = conv_output_length(len, k, stride);

  Pool1dResult r;
  r.output = Tensor({ch, out_len});
  r.argmax.resize(static_cast<std::size_t>(ch * out_len));
  const double* xv = x.data();
  for (std::int64_t c = 0; c < ch; ++c) {
    for (std::int64_t t = 0; t < out_len; ++t) {
      std::int64_t best = c * len + t * stride;
      double bestv = xv[best];
      for (std::int64_t kk = 1; kk < k; ++kk) {
        const std::int64_t idx = c * len + t * stride + kk;
        if (xv[idx] > bestv) {  // strict: ties keep the first index
          bestv = xv[idx];
          best = idx;
        }
      }
      r.output.at(c, t) = bestv;
      r.argmax[static_cast<std::size_t>(c * out_len + t)] = best;
    }
  }
  return r;
}

Tensor maxpool1d_backward(const std::vector<std::int64_t>& input_shape,
                          const std::vector<std::int64_t>& argmax, const Tensor& dout) {
  if (argmax.size() != static_cast<std::size_t>(dout.numel())) {
    throw ShapeError("maxpool backward: argmax size " + std::to_string(argmax.size()) +
                     " vs dout " + shape_string(dout));
  }
  Tensor dx = Tensor::zeros(input_shape);
  const double* dy = dout.data();
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    dx[argmax[i]] += dy[i];
  }
  return dx;
}

Tensor dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 1 || weight.rank() != 2 || bias.rank() != 1) {
    throw ShapeError("dense expects x [n], weight [m,n], bias [m]; got " + shape_string(x) +
                     ", " + shape_string(weight) + ", " + shape_string(bias));
  }
  const std::int64_t m = weight.dim(0), n = weight.dim(1);
  if (x.dim(0) != n || bias.dim(0) != m) {
    throw ShapeError("dense shape mismatch: weight " + shape_string(weight) + ", x " +
                     shape_string(x) + ", bias " + shape_string(bias));
  }
  Tensor y({m});
  const double* w = weight.data();
  const double* xv = x.data();
  for (std::int64_t i = 0; i < m; ++i) {
    double acc = bias[i];
    const double* wr = w + i * n;
    for (std::int64_t j = 0; j < n; ++j) acc += wr[j] * xv[j];
    y[i] = acc;
  }
  return y;
}

DenseGrads dense_backward(const Tensor& x, const Tensor& weight, const Tensor& dout,
                          bool need_dinput) {
  const std::int64_t m = weight.dim(0), n = weight.dim(1);
  DenseGrads g;
  g.dweight = Tensor::zeros(weight.shape());
  g.dbias = dout;
  const double* xv = x.data();
  const double* dy = dout.data();
  for (std::int64_t i = 0; i < m; ++i) {
    const double d = dy[i];
    double* dwr = g.dweight.data() + i * n;
    for (std::int64_t j = 0; j < n; ++j) dwr[j] = d * xv[j];
  }
  if (need_dinput) {
    g.dinput = Tensor::zeros(x.shape());
    double* dx = g.dinput.data();
    const double* w = weight.data();
    for (std::int64_t i = 0; i < m; ++i) {
      const double d = dy[i];
      const double* wr = w + i * n;
      for (std::int64_t j = 0; j < n; ++j) dx[j] += d * wr[j];
    }
  }
  return g;
}

Tensor softmax(const Tensor& logits) {
  const std::int64_t c = logits.dim(0);
  double maxv = logits[0];
  for (std::int64_t i = 1; i < c; ++i) maxv = logits[i] > maxv ? logits[i] : maxv;
  Tensor probs({c});
  double sum = 0.0;
  for (std::int64_t i = 0; i < c; ++i) {
    probs[i] = std::exp(logits[i] - maxv);
    sum += probs[i];
  }
  for (std::int64_t i = 0; i < c; ++i) probs[i] /= sum;
  return probs;
}

SoftmaxLoss softmax_cross_entropy(const Tensor& logits, int label) {
  if (logits.rank() != 1 || logits.dim(0) < 2) {
    throw ShapeError("softmax expects at least 2 logits, got " + shape_string(logits));
  }
  const std::int64_t c = logits.dim(0);
  if (label < 0 || label >= c) {
    throw ConfigError("label " + std::to_string(label) + " out of range for " +
                      std::to_string(c) + " classes");
  }
  double maxv = logits[0];
  for (std::int64_t i = 1; i < c; ++i) maxv = logits[i] > maxv ? logits[i] : maxv;

  SoftmaxLoss r;
  r.probs = Tensor({c});
  double sum = 0.0;
  for (std::int64_t i = 0; i < c; ++i) {
    const double e = std::exp(logits[i] - maxv);
    r.probs[i] = e;
    sum += e;
  }
  for (std::int64_t i = 0; i < c; ++i) r.probs[i] /= sum;
  // log-sum-exp form: finite even when exp(logit - max) underflows to 0.
  r.loss = (maxv + std::log(sum)) - logits[label];
  return r;
}

Tensor softmax_cross_entropy_backward(const Tensor& probs, int label) {
  Tensor d = probs;
  d[label] -= 1.0;
  return d;
}

}  // namespace ecgprune
