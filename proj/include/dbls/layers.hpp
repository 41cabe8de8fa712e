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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dbls/rng.hpp"
#include "dbls/tensor.hpp"

namespace dbls {

using TokenId = std::uint32_t;

enum class Activation { identity, sigmoid, relu, softmax };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

/// Elementwise activation; softmax normalizes along the last axis.
Tensor activate(const Tensor& pre, Activation act);

/// Gradient w.r.t. the pre-activation, given the activation's output and the
/// gradient w.r.t. that output.
Tensor activation_backward(const Tensor& output, const Tensor& upstream, Activation act);

/// Gradients produced by one backward step. `params` mirrors the layer's
/// parameters in the order the forward op takes them.
struct LayerGrads {
  std::vector<Tensor> params;
  Tensor input;
};

// ---------------------------------------------------------------------------
// Dense: input [batch x in] (or a rank-1 [in]), weights [in x out], bias [out].

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                     Activation act);

LayerGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& output,
                          Activation act, const Tensor& upstream);

// ---------------------------------------------------------------------------
// Conv1d (valid mode): input [length x channels], kernels
// [width x channels x filters], bias [filters] -> [length - width + 1 x filters].

Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                      Activation act);

LayerGrads conv1d_backward(const Tensor& input, const Tensor& kernels, const Tensor& output,
                           Activation act, const Tensor& upstream);

// ---------------------------------------------------------------------------
// Max pooling over the length axis of [length x filters]. A trailing window
// shorter than pool_width is pooled as-is, so the output has
// ceil(length / pool_width) rows.

struct PoolResult {
  Tensor output;
  /// Row index in the input that won each output entry, row-major like output.
  std::vector<std::size_t> argmax;
};

PoolResult maxpool1d_forward(const Tensor& input, long pool_width);

/// Scatters upstream back to the winning rows; returns [length x filters].
Tensor maxpool1d_backward(const Shape& input_shape, std::span<const std::size_t> argmax,
                          const Tensor& upstream);

// ---------------------------------------------------------------------------
// Embedding lookup: table [vocab x dim] -> [ids.size() x dim].

Tensor embedding_forward(std::span<const TokenId> ids, const Tensor& table);

/// Dense gradient w.r.t. the table.
Tensor embedding_backward(std::span<const TokenId> ids, const Shape& table_shape,
                          const Tensor& upstream);

/// Adds the embedding gradient into `table_grad` in place; rows for `skip_id`
/// are left untouched.
void embedding_accumulate(std::span<const TokenId> ids, const Tensor& upstream, Tensor& table_grad,
                          std::optional<TokenId> skip_id = std::nullopt);

// ---------------------------------------------------------------------------
// Inverted dropout.

enum class DropoutMode { train, mc_inference, off };

struct DropoutMask {
  std::vector<std::uint8_t> keep;
  double rate = 0.0;

  /// Each entry kept independently with probability 1 - rate.
  static DropoutMask draw(std::size_t width, double rate, Rng& rng);

  std::size_t width() const noexcept { return keep.size(); }
};

/// Mode off returns the input unchanged. Otherwise dropped entries become 0
/// and kept entries are scaled by 1 / (1 - rate).
Tensor dropout_apply(const Tensor& input, const DropoutMask& mask, DropoutMode mode);

Tensor dropout_backward(const Tensor& upstream, const DropoutMask& mask, DropoutMode mode);

// ---------------------------------------------------------------------------
// Stateful wrappers that cache what backward needs. Calling backward before
// forward throws StateError.

class DenseLayer {
 public:
  explicit DenseLayer(Activation act) : act_(act) {}
  Tensor forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
  LayerGrads backward(const Tensor& upstream) const;
  void reset() { cache_.reset(); }

 private:
  struct Cache {
    Tensor input, weights, output;
  };
  Activation act_;
  std::optional<Cache> cache_;
};

class Conv1dLayer {
 public:
  explicit Conv1dLayer(Activation act) : act_(act) {}
  Tensor forward(const Tensor& input, const Tensor& kernels, const Tensor& bias);
  LayerGrads backward(const Tensor& upstream) const;
  void reset() { cache_.reset(); }

 private:
  struct Cache {
    Tensor input, kernels, output;
  };
  Activation act_;
  std::optional<Cache> cache_;
};

class MaxPool1dLayer {
 public:
  explicit MaxPool1dLayer(long pool_width) : pool_width_(pool_width) {}
  Tensor forward(const Tensor& input);
  LayerGrads backward(const Tensor& upstream) const;
  const std::vector<std::size_t>& argmax() const;
  void reset() { cache_.reset(); }

 private:
  struct Cache {
    Shape input_shape;
    std::vector<std::size_t> argmax;
  };
  long pool_width_;
  std::optional<Cache> cache_;
};

class EmbeddingLayer {
 public:
  Tensor forward(std::span<const TokenId> ids, const Tensor& table);
  LayerGrads backward(const Tensor& upstream) const;
  void reset() { cache_.reset(); }

 private:
  struct Cache {
    std::vector<TokenId> ids;
    Shape table_shape;
  };
  std::optional<Cache> cache_;
};

class DropoutLayer {
 public:
  explicit DropoutLayer(DropoutMode mode) : mode_(mode) {}
  Tensor forward(const Tensor& input, const DropoutMask& mask);
  LayerGrads backward(const Tensor& upstream) const;
  void reset() { cache_.reset(); }

 private:
  DropoutMode mode_;
  std::optional<DropoutMask> cache_;
};

}  // namespace dbls
