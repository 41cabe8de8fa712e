// Copyright (c) 2026 The dbls Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dbls/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dbls/error.hpp"

namespace dbls {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
    case Activation::softmax: return "softmax";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  if (name == "softmax") return Activation::softmax;
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

namespace {

std::size_t last_extent(const Tensor& t) { return t.shape().back(); }

void softmax_rows(std::span<double> data, std::size_t width) {
  for (std::size_t start = 0; start < data.size(); start += width) {
    auto row = data.subspan(start, width);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      total += v;
    }
    for (double& v : row) v /= total;
  }
}

// Views a rank-1 tensor as a single row.
Tensor as_rows(const Tensor& t) {
  if (t.rank() == 1) return t.reshaped({1, t.size()});
  return t;
}

}  // namespace

Tensor activate(const Tensor& pre, Activation act) {
  Tensor out = pre;
  auto data = out.data();
  switch (act) {
    case Activation::identity:
      break;
    case Activation::sigmoid:
      for (double& v : data) v = 1.0 / (1.0 + std::exp(-v));
      break;
    case Activation::relu:
      for (double& v : data) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::softmax:
      softmax_rows(data, last_extent(out));
      break;
  }
  return out;
}

Tensor activation_backward(const Tensor& output, const Tensor& upstream, Activation act) {
  if (output.shape() != upstream.shape()) {
    throw DimensionError("activation gradient shape " + shape_string(upstream.shape()) +
                         " does not match output " + shape_string(output.shape()));
  }
  Tensor grad = upstream;
  auto g = grad.data();
  auto y = output.data();
  switch (act) {
    case Activation::identity:
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i] * (1.0 - y[i]);
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(y[i] > 0.0)) g[i] = 0.0;
      }
      break;
    case Activation::softmax: {
      const std::size_t width = last_extent(output);
      for (std::size_t start = 0; start < g.size(); start += width) {
        double dot = 0.0;
        for (std::size_t j = 0; j < width; ++j) dot += y[start + j] * g[start + j];
        for (std::size_t j = 0; j < width; ++j) g[start + j] = y[start + j] * (g[start + j] - dot);
      }
      break;
    }
  }
  return grad;
}

// --- dense -----------------------------------------------------------------

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                     Activation act) {
  if (input.rank() < 1 || input.rank() > 2 || weights.rank() != 2 ||
      input.shape().back() != weights.dim(0)) {
    throw DimensionError("dense: input " + shape_string(input.shape()) +
                         " does not conform to weights " + shape_string(weights.shape()));
  }
  const std::size_t in = weights.dim(0);
  const std::size_t out = weights.dim(1);
  if (bias.rank() != 1 || bias.size() != out) {
    throw DimensionError("dense: bias " + shape_string(bias.shape()) + " does not match weights " +
                         shape_string(weights.shape()));
  }
  const std::size_t batch = input.size() / in;
  Tensor pre(batch == 1 && input.rank() == 1 ? Shape{out} : Shape{batch, out});
  auto x = input.data();
  auto w = weights.data();
  auto z = pre.data();
  for (std::size_t b = 0; b < batch; ++b) {
    double* zrow = z.data() + b * out;
    std::copy(bias.data().begin(), bias.data().end(), zrow);
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = x[b * in + i];
      if (xi == 0.0) continue;
      const double* wrow = w.data() + i * out;
      for (std::size_t o = 0; o < out; ++o) zrow[o] += xi * wrow[o];
    }
  }
  return activate(pre, act);
}

LayerGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& output,
                          Activation act, const Tensor& upstream) {
  const Tensor dpre = as_rows(activation_backward(output, upstream, act));
  const Tensor x = as_rows(input);
  const std::size_t batch = x.dim(0);
  const std::size_t in = weights.dim(0);
  const std::size_t out = weights.dim(1);
  if (dpre.dim(0) != batch || dpre.dim(1) != out) {
    throw DimensionError("dense backward: upstream " + shape_string(upstream.shape()) +
                         " does not match output width " + std::to_string(out));
  }

  Tensor dw({in, out});
  Tensor db({out});
  Tensor dx({batch, in});
  for (std::size_t b = 0; b < batch; ++b) {
    auto g = dpre.row(b);
    for (std::size_t o = 0; o < out; ++o) db[o] += g[o];
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = x.at(b, i);
      double acc = 0.0;
      for (std::size_t o = 0; o < out; ++o) {
        dw.at(i, o) += xi * g[o];
        acc += weights.at(i, o) * g[o];
      }
      dx.at(b, i) = acc;
    }
  }
  LayerGrads grads;
  grads.params.push_back(std::move(dw));
  grads.params.push_back(std::move(db));
  grads.input = input.rank() == 1 ? dx.reshaped({in}) : std::move(dx);
  return grads;
}

// --- conv1d ----------------------------------------------------------------

Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                      Activation act) {
  if (input.rank() != 2 || kernels.rank() != 3 || input.dim(1) != kernels.dim(1)) {
    throw DimensionError("conv1d: input " + shape_string(input.shape()) +
                         " does not conform to kernels " + shape_string(kernels.shape()));
  }
  const std::size_t length = input.dim(0);
  const std::size_t channels = input.dim(1);
  const std::size_t width = kernels.dim(0);
  const std::size_t filters = kernels.dim(2);
  if (width > length) {
    throw DimensionError("conv1d: kernel width " + std::to_string(width) +
                         " exceeds input length " + std::to_string(length) + " (input " +
                         shape_string(input.shape()) + ", kernels " +
                         shape_string(kernels.shape()) + ")");
  }
  if (bias.rank() != 1 || bias.size() != filters) {
    throw DimensionError("conv1d: bias " + shape_string(bias.shape()) +
                         " does not match kernels " + shape_string(kernels.shape()));
  }
  const std::size_t out_len = length - width + 1;
  Tensor pre({out_len, filters});
  const double* x = input.data().data();
  const double* k = kernels.data().data();
  double* z = pre.data().data();
  for (std::size_t t = 0; t < out_len; ++t) {
    double* zrow = z + t * filters;
    std::copy(bias.data().begin(), bias.data().end(), zrow);
    for (std::size_t j = 0; j < width; ++j) {
      const double* xrow = x + (t + j) * channels;
      const double* kslab = k + j * channels * filters;
      for (std::size_t c = 0; c < channels; ++c) {
        const double xv = xrow[c];
        if (xv == 0.0) continue;
        const double* krow = kslab + c * filters;
        for (std::size_t f = 0; f < filters; ++f) zrow[f] += xv * krow[f];
      }
    }
  }
  return activate(pre, act);
}

LayerGrads conv1d_backward(const Tensor& input, const Tensor& kernels, const Tensor& output,
                           Activation act, const Tensor& upstream) {
  const Tensor dpre = activation_backward(output, upstream, act);
  const std::size_t channels = input.dim(1);
  const std::size_t width = kernels.dim(0);
  const std::size_t filters = kernels.dim(2);
  const std::size_t out_len = output.dim(0);

  Tensor dk(kernels.shape());
  Tensor db({filters});
  Tensor dx(input.shape());
  const double* x = input.data().data();
  const double* k = kernels.data().data();
  double* dkp = dk.data().data();
  double* dxp = dx.data().data();
  for (std::size_t t = 0; t < out_len; ++t) {
    const auto g = dpre.row(t);
    if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) continue;
    for (std::size_t f = 0; f < filters; ++f) db[f] += g[f];
    for (std::size_t j = 0; j < width; ++j) {
      const double* xrow = x + (t + j) * channels;
      double* dxrow = dxp + (t + j) * channels;
      for (std::size_t c = 0; c < channels; ++c) {
        const double* krow = k + (j * channels + c) * filters;
        double* dkrow = dkp + (j * channels + c) * filters;
        const double xv = xrow[c];
        double acc = 0.0;
        for (std::size_t f = 0; f < filters; ++f) {
          dkrow[f] += xv * g[f];
          acc += krow[f] * g[f];
        }
        dxrow[c] += acc;
      }
    }
  }
  LayerGrads grads;
  grads.params.push_back(std::move(dk));
  grads.params.push_back(std::move(db));
  grads.input = std::move(dx);
  return grads;
}

// --- max pooling -----------------------------------------------------------

PoolResult maxpool1d_forward(const Tensor& input, long pool_width) {
  if (pool_width <= 0) {
    throw ArgumentError("maxpool1d: pool width must be positive, got " + std::to_string(pool_width));
  }
  if (input.rank() != 2) {
    throw DimensionError("maxpool1d: expected [length x filters], got " +
                         shape_string(input.shape()));
  }
  const std::size_t length = input.dim(0);
  const std::size_t filters = input.dim(1);
  const auto width = static_cast<std::size_t>(pool_width);
  const std::size_t out_len = (length + width - 1) / width;

  PoolResult result{Tensor({out_len, filters}), std::vector<std::size_t>(out_len * filters)};
  for (std::size_t o = 0; o < out_len; ++o) {
    const std::size_t begin = o * width;
    const std::size_t end = std::min(length, begin + width);
    for (std::size_t f = 0; f < filters; ++f) {
      std::size_t best = begin;
      for (std::size_t t = begin + 1; t < end; ++t) {
        if (input.at(t, f) > input.at(best, f)) best = t;
      }
      result.output.at(o, f) = input.at(best, f);
      result.argmax[o * filters + f] = best;
    }
  }
  return result;
}

Tensor maxpool1d_backward(const Shape& input_shape, std::span<const std::size_t> argmax,
                          const Tensor& upstream) {
  if (argmax.size() != upstream.size() || input_shape.size() != 2) {
    throw DimensionError("maxpool1d backward: upstream " + shape_string(upstream.shape()) +
                         " does not match the cached pooling of " + shape_string(input_shape));
  }
  Tensor dx(input_shape);
  const std::size_t filters = input_shape[1];
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    dx.at(argmax[i], i % filters) += upstream[i];
  }
  return dx;
}

// --- embedding -------------------------------------------------------------

Tensor embedding_forward(std::span<const TokenId> ids, const Tensor& table) {
  if (table.rank() != 2) {
    throw DimensionError("embedding: table must be [vocab x dim], got " +
                         shape_string(table.shape()));
  }
  if (ids.empty()) throw DimensionError("embedding: empty id sequence");
  const std::size_t vocab = table.dim(0);
  const std::size_t dim = table.dim(1);
  Tensor out({ids.size(), dim});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] >= vocab) {
      throw VocabularyError("embedding: token id " + std::to_string(ids[t]) +
                            " is outside a vocabulary of size " + std::to_string(vocab));
    }
    auto src = table.row(ids[t]);
    std::copy(src.begin(), src.end(), out.row(t).begin());
  }
  return out;
}

void embedding_accumulate(std::span<const TokenId> ids, const Tensor& upstream, Tensor& table_grad,
                          std::optional<TokenId> skip_id) {
  if (upstream.rank() != 2 || upstream.dim(0) != ids.size() ||
      upstream.dim(1) != table_grad.dim(1)) {
    throw DimensionError("embedding backward: upstream " + shape_string(upstream.shape()) +
                         " does not match " + std::to_string(ids.size()) + " ids into table " +
                         shape_string(table_grad.shape()));
  }
  const std::size_t dim = table_grad.dim(1);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (skip_id && ids[t] == *skip_id) continue;
    if (ids[t] >= table_grad.dim(0)) {
      throw VocabularyError("embedding backward: token id " + std::to_string(ids[t]) +
                            " is outside the table");
    }
    double* dst = table_grad.row(ids[t]).data();
    const double* src = upstream.row(t).data();
    for (std::size_t d = 0; d < dim; ++d) dst[d] += src[d];
  }
}

Tensor embedding_backward(std::span<const TokenId> ids, const Shape& table_shape,
                          const Tensor& upstream) {
  Tensor grad(table_shape);
  embedding_accumulate(ids, upstream, grad);
  return grad;
}

// --- dropout ---------------------------------------------------------------

namespace {

void check_rate(double rate) {
  if (!(rate >= 0.0) || rate >= 1.0) {
    throw ArgumentError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
}

Tensor apply_mask(const Tensor& t, const DropoutMask& mask, const char* what) {
  check_rate(mask.rate);
  const std::size_t width = t.shape().back();
  if (mask.width() != width) {
    throw DimensionError(std::string(what) + ": mask width " + std::to_string(mask.width()) +
                         " does not match tensor " + shape_string(t.shape()));
  }
  const double scale = 1.0 / (1.0 - mask.rate);
  Tensor out = t;
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = mask.keep[i % width] ? data[i] * scale : 0.0;
  }
  return out;
}

}  // namespace

DropoutMask DropoutMask::draw(std::size_t width, double rate, Rng& rng) {
  check_rate(rate);
  DropoutMask mask;
  mask.rate = rate;
  mask.keep.resize(width);
  const double keep_prob = 1.0 - rate;
  for (auto& k : mask.keep) k = rng.bernoulli(keep_prob) ? 1 : 0;
  return mask;
}

Tensor dropout_apply(const Tensor& input, const DropoutMask& mask, DropoutMode mode) {
  check_rate(mask.rate);
  if (mode == DropoutMode::off) return input;
  return apply_mask(input, mask, "dropout");
}

Tensor dropout_backward(const Tensor& upstream, const DropoutMask& mask, DropoutMode mode) {
  if (mode == DropoutMode::off) return upstream;
  return apply_mask(upstream, mask, "dropout backward");
}

// --- cached layers ---------------------------------------------------------

namespace {

[[noreturn]] void missing_cache(const char* layer) {
  throw StateError(std::string(layer) + ": backward called without a cached forward pass");
}

}  // namespace

Tensor DenseLayer::forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  Tensor out = dense_forward(input, weights, bias, act_);
  cache_ = Cache{input, weights, out};
  return out;
}

LayerGrads DenseLayer::backward(const Tensor& upstream) const {
  if (!cache_) missing_cache("dense");
  return dense_backward(cache_->input, cache_->weights, cache_->output, act_, upstream);
}

Tensor Conv1dLayer::forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  Tensor out = conv1d_forward(input, kernels, bias, act_);
  cache_ = Cache{input, kernels, out};
  return out;
}

LayerGrads Conv1dLayer::backward(const Tensor& upstream) const {
  if (!cache_) missing_cache("conv1d");
  return conv1d_backward(cache_->input, cache_->kernels, cache_->output, act_, upstream);
}

Tensor MaxPool1dLayer::forward(const Tensor& input) {
  PoolResult r = maxpool1d_forward(input, pool_width_);
  cache_ = Cache{input.shape(), std::move(r.argmax)};
  return std::move(r.output);
}

LayerGrads MaxPool1dLayer::backward(const Tensor& upstream) const {
  if (!cache_) missing_cache("maxpool1d");
  return LayerGrads{{}, maxpool1d_backward(cache_->input_shape, cache_->argmax, upstream)};
}

const std::vector<std::size_t>& MaxPool1dLayer::argmax() const {
  if (!cache_) missing_cache("maxpool1d");
  return cache_->argmax;
}

Tensor EmbeddingLayer::forward(std::span<const TokenId> ids, const Tensor& table) {
  Tensor out = embedding_forward(ids, table);
  cache_ = Cache{std::vector<TokenId>(ids.begin(), ids.end()), table.shape()};
  return out;
}

LayerGrads EmbeddingLayer::backward(const Tensor& upstream) const {
  if (!cache_) missing_cache("embedding");
  LayerGrads grads;
  grads.params.push_back(embedding_backward(cache_->ids, cache_->table_shape, upstream));
  return grads;
}

Tensor DropoutLayer::forward(const Tensor& input, const DropoutMask& mask) {
  Tensor out = dropout_apply(input, mask, mode_);
  cache_ = mask;
  return out;
}

LayerGrads DropoutLayer::backward(const Tensor& upstream) const {
  if (!cache_) missing_cache("dropout");
  return LayerGrads{{}, dropout_backward(upstream, *cache_, mode_)};
}

}  // namespace dbls
