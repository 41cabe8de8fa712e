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
#include <string>

#include "dbls/tensor.hpp"

namespace dbls {

/// Plain gradient descent: params[i] -= learning_rate * grads[i].
///
/// Shapes must match pairwise. If any gradient holds a non-finite value a
/// TrainingError naming that parameter is thrown and nothing is updated.
/// `names` labels the parameters in error messages and may be empty.
void sgd_step(std::span<Tensor> params, std::span<const Tensor> grads, double learning_rate,
              std::span<const std::string> names = {});

}  // namespace dbls
