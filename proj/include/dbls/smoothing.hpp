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
#include <span>
#include <string>
#include <vector>

#include "dbls/labels.hpp"
#include "dbls/model.hpp"

namespace dbls {

enum class SmoothingMode { hard, uniform, bayesian };

/// How training targets are built from the annotated class.
///
/// bayesian: train on hard labels, run `passes` MC-dropout passes per training
/// example, then emit (1 - alpha) * one_hot + alpha * predictive_mean, or the
/// predictive mean itself when `pure` is set. `rounds` > 1 repeats the
/// train/simulate step on the previous round's labels.
struct SmoothingConfig {
  SmoothingMode mode = SmoothingMode::hard;
  double alpha = 0.0;
  std::size_t passes = 100;
  bool pure = false;
  std::size_t rounds = 1;

  static SmoothingConfig hard() { return {}; }
  static SmoothingConfig uniform(double alpha) { return {SmoothingMode::uniform, alpha}; }
  static SmoothingConfig bayesian(double alpha, std::size_t passes = 100) {
    return {SmoothingMode::bayesian, alpha, passes};
  }

  /// Stable label such as "hard", "uniform_0.05" or "bayesian_0.1".
  std::string name() const;
  void validate() const;
};

std::string_view to_string(SmoothingMode mode);
SmoothingMode parse_smoothing_mode(std::string_view name);

/// Inverse of SmoothingConfig::name().
SmoothingConfig parse_condition(std::string_view name, std::size_t passes = 100);

LabelDistribution one_hot(std::size_t class_index);

/// True class -> 1 - alpha, every other class -> alpha / (k - 1).
LabelDistribution uniform_smooth(const LabelDistribution& label, double alpha);

/// (1 - alpha) * one_hot(hard_class) + alpha * predictive_mean, or the
/// predictive mean alone when `pure`.
LabelDistribution blend_label(std::size_t hard_class, const LabelDistribution& predictive_mean,
                              double alpha, bool pure = false);

struct HardExample {
  EncodedPost post;
  std::size_t label = 0;
};

struct BayesianSmoothing {
  std::vector<LabelDistribution> labels;
  std::vector<PredictiveDistribution> predictive;  // last round's MC estimates
  std::vector<std::vector<double>> histories;      // stage-1 loss history per round
};

/// Soft labels for `examples`. All randomness derives from `seed`.
BayesianSmoothing bayesian_smooth(std::span<const HardExample> examples,
                                  const ModelConfig& model_config, const TrainConfig& train_config,
                                  const SmoothingConfig& smoothing, std::uint64_t seed);

std::vector<LabelDistribution> bayesian_smooth_labels(std::span<const HardExample> examples,
                                                      const ModelConfig& model_config,
                                                      const TrainConfig& train_config,
                                                      const SmoothingConfig& smoothing,
                                                      std::uint64_t seed);

/// Training-ready pairs for one labelling condition.
std::vector<LabeledPost> run_smoothing_condition(const SmoothingConfig& condition,
                                                 std::span<const HardExample> examples,
                                                 const ModelConfig& model_config,
                                                 const TrainConfig& train_config,
                                                 std::uint64_t seed);

}  // namespace dbls
