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

#include <span>

#include "dbls/labels.hpp"
#include "dbls/tensor.hpp"

namespace dbls {

/// Predicted probabilities are clamped to [kLogClamp, 1] before the log.
inline constexpr double kLogClamp = 1e-12;

/// Mean over rows of -sum_k target_k * log(predicted_k). Both tensors are
/// [batch x classes] (or a single rank-1 row) and every row must sum to 1
/// within 1e-6.
double cce_loss(const Tensor& predicted, const Tensor& target);

double cce_loss(std::span<const LabelDistribution> predicted,
                std::span<const LabelDistribution> target);

/// Gradient of cce_loss w.r.t. the predicted probabilities.
Tensor cce_gradient(const Tensor& predicted, const Tensor& target);

/// Gradient of cce_loss(softmax(z), target) w.r.t. the logits z, given
/// p = softmax(z): (p - target) / batch.
Tensor softmax_cce_gradient(const Tensor& probabilities, const Tensor& target);

}  // namespace dbls
