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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dbls/labels.hpp"
#include "dbls/layers.hpp"
#include "dbls/rng.hpp"
#include "dbls/tensor.hpp"
#include "dbls/textpipe.hpp"

namespace dbls {

/// Architecture of the text classifier:
///
///   embedding -> conv1d(relu) -> conv1d(relu) -> maxpool -> flatten
///             -> dropout -> dense(softmax, 5 outputs)
///
/// pool_width 0 pools over the whole remaining length (global max pool).
struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t emb_dim = 32;
  std::size_t conv1_filters = 32;
  std::size_t conv1_width = 5;
  std::size_t conv2_filters = 32;
  std::size_t conv2_width = 3;
  std::size_t pool_width = 0;
  double dropout_rate = 0.5;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t class_count = kClassCount;

  /// Throws ConfigurationError when the configuration cannot be built.
  void validate() const;

  std::size_t conv1_length() const { return max_len - conv1_width + 1; }
  std::size_t conv2_length() const { return conv1_length() - conv2_width + 1; }
  std::size_t effective_pool_width() const { return pool_width == 0 ? conv2_length() : pool_width; }
  std::size_t pooled_length() const;
  std::size_t flatten_dim() const { return pooled_length() * conv2_filters; }
  std::size_t parameter_count() const;

  bool operator==(const ModelConfig&) const = default;
};

/// One full assignment of the classifier's trainable parameters.
struct ModelParams {
  Tensor embedding;      // [vocab x emb_dim]
  Tensor conv1_kernels;  // [conv1_width x emb_dim x conv1_filters]
  Tensor conv1_bias;     // [conv1_filters]
  Tensor conv2_kernels;  // [conv2_width x conv1_filters x conv2_filters]
  Tensor conv2_bias;     // [conv2_filters]
  Tensor dense_weights;  // [flatten_dim x 5]
  Tensor dense_bias;     // [5]

  static constexpr std::array<std::string_view, 7> kNames = {
      "embedding", "conv1_kernels", "conv1_bias", "conv2_kernels",
      "conv2_bias", "dense_weights", "dense_bias"};

  /// All-zero parameters shaped for `config`.
  static ModelParams zeros(const ModelConfig& config);

  /// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases
  /// and a zero padding row in the embedding table.
  static ModelParams initialize(const ModelConfig& config, Rng& rng);

  std::array<Tensor*, 7> tensors();
  std::array<const Tensor*, 7> tensors() const;

  /// Throws ConfigurationError unless every tensor is shaped for `config`.
  void check_shapes(const ModelConfig& config) const;

  bool operator==(const ModelParams&) const = default;
};

/// Gradients share the parameter layout.
using ModelGrads = ModelParams;

/// Returns params - learning_rate * grads. A non-finite gradient raises
/// TrainingError naming the offending tensor.
ModelParams sgd_step(const ModelParams& params, const ModelGrads& grads, double learning_rate);

/// Deterministic forward pass with dropout off.
LabelDistribution forward(const ModelParams& params, const ModelConfig& config,
                          const EncodedPost& post);

/// Stochastic forward pass: one dropout mask drawn from `dropout_rng`.
LabelDistribution forward(const ModelParams& params, const ModelConfig& config,
                          const EncodedPost& post, Rng& dropout_rng);

/// Argmax class of the deterministic forward pass.
std::size_t predict_class(const ModelParams& params, const ModelConfig& config,
                          const EncodedPost& post);

struct LabeledPost {
  EncodedPost post;
  LabelDistribution label{};
};

struct BatchGradient {
  double loss = 0.0;  // mean cross-entropy over the batch
  ModelGrads grads;   // gradient of that mean
};

/// Loss and analytic gradient for a batch under training-mode dropout with
/// the given per-example masks (one per example, width flatten_dim).
BatchGradient compute_gradient(const ModelParams& params, const ModelConfig& config,
                               std::span<const LabeledPost> batch,
                               std::span<const DropoutMask> masks);

/// Loss only, same conventions as compute_gradient.
double batch_loss(const ModelParams& params, const ModelConfig& config,
                  std::span<const LabeledPost> batch, std::span<const DropoutMask> masks);

struct TrainConfig {
  double learning_rate = 0.3;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> history;  // mean training loss per epoch
};

/// Mini-batch gradient descent. Shuffling and dropout masks come from
/// independent streams derived from config.seed.
TrainResult train(ModelParams params, const ModelConfig& config,
                  std::span<const LabeledPost> dataset, const TrainConfig& train_config);

// --- Monte Carlo dropout ---------------------------------------------------

struct PredictiveDistribution {
  LabelDistribution mean{};
  LabelDistribution variance{};  // population variance over the passes
  std::size_t passes = 0;
};

/// Mean and variance of a set of stochastic passes.
PredictiveDistribution summarize_passes(std::span<const LabelDistribution> passes);

/// The T stochastic softmax outputs. Pass t draws its mask from a sub-stream
/// keyed by (one word drawn from `rng`, t), so pass results do not depend on
/// evaluation order.
std::vector<LabelDistribution> mc_passes(const ModelParams& params, const ModelConfig& config,
                                         const EncodedPost& post, std::size_t passes, Rng& rng);

PredictiveDistribution mc_predict(const ModelParams& params, const ModelConfig& config,
                                  const EncodedPost& post, std::size_t passes, Rng& rng);

// --- persistence -----------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  ModelConfig config;
};

/// Little-endian binary: magic "DBLSCKPT", u32 version, the config, then the
/// seven parameter tensors in declaration order (u32 rank, u64 extents,
/// f64 values).
void save_checkpoint(const ModelParams& params, const ModelConfig& config,
                     const std::filesystem::path& path);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dbls
