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

#include "dbls/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dbls/error.hpp"

namespace dbls {

namespace {

std::size_t rows_of(const Tensor& t) { return t.rank() == 1 ? 1 : t.dim(0); }

void check_pair(const Tensor& predicted, const Tensor& target) {
  if (predicted.rank() == 0 || predicted.rank() > 2 || predicted.shape() != target.shape()) {
    throw DimensionError("cross-entropy: predicted " + shape_string(predicted.shape()) +
                         " and target " + shape_string(target.shape()) + " differ");
  }
  const std::size_t width = predicted.shape().back();
  auto check_rows = [width](const Tensor& t, const char* name) {
    for (std::size_t start = 0; start < t.size(); start += width) {
      double total = 0.0;
      for (std::size_t j = 0; j < width; ++j) total += t[start + j];
      if (std::abs(total - 1.0) > 1e-6) {
        throw ArgumentError(std::string("cross-entropy: ") + name + " row " +
                            std::to_string(start / width) + " sums to " + std::to_string(total));
      }
    }
  };
  check_rows(predicted, "predicted");
  check_rows(target, "target");
}

Tensor stack(std::span<const LabelDistribution> rows) {
  std::vector<double> data;
  data.reserve(rows.size() * kClassCount);
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return Tensor({rows.size(), kClassCount}, std::move(data));
}

}  // namespace

double cce_loss(const Tensor& predicted, const Tensor& target) {
  check_pair(predicted, target);
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (target[i] == 0.0) continue;
    total -= target[i] * std::log(std::clamp(predicted[i], kLogClamp, 1.0));
  }
  return total / static_cast<double>(rows_of(predicted));
}

double cce_loss(std::span<const LabelDistribution> predicted,
                std::span<const LabelDistribution> target) {
  if (predicted.size() != target.size() || predicted.empty()) {
    throw DimensionError("cross-entropy: batch sizes " + std::to_string(predicted.size()) +
                         " and " + std::to_string(target.size()) + " differ or are empty");
  }
  return cce_loss(stack(predicted), stack(target));
}

Tensor cce_gradient(const Tensor& predicted, const Tensor& target) {
  check_pair(predicted, target);
  const double batch = static_cast<double>(rows_of(predicted));
  Tensor grad(predicted.shape());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double p = predicted[i];
    // The clamp is flat below kLogClamp.
    grad[i] = p < kLogClamp ? 0.0 : -target[i] / (p * batch);
  }
  return grad;
}

Tensor softmax_cce_gradient(const Tensor& probabilities, const Tensor& target) {
  check_pair(probabilities, target);
  const double batch = static_cast<double>(rows_of(probabilities));
  Tensor grad(probabilities.shape());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = (probabilities[i] - target[i]) / batch;
  }
  return grad;
}

}  // namespace dbls
