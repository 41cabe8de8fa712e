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

#include "dbls/optim.hpp"

#include "dbls/error.hpp"

namespace dbls {

void sgd_step(std::span<Tensor> params, std::span<const Tensor> grads, double learning_rate,
              std::span<const std::string> names) {
  if (!(learning_rate >= 0.0)) {
    throw ArgumentError("learning rate must be non-negative, got " + std::to_string(learning_rate));
  }
  if (params.size() != grads.size()) {
    throw DimensionError("sgd: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  auto label = [&](std::size_t i) {
    return i < names.size() ? names[i] : "parameter " + std::to_string(i);
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape()) {
      throw DimensionError("sgd: gradient " + shape_string(grads[i].shape()) + " for " + label(i) +
                           " does not mirror " + shape_string(params[i].shape()));
    }
    if (!grads[i].all_finite()) {
      throw TrainingError("sgd: non-finite gradient in layer '" + label(i) + "'");
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= learning_rate * g[j];
  }
}

}  // namespace dbls
