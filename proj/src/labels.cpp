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

#include "dbls/labels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>

#include "dbls/error.hpp"

namespace dbls {

std::string_view class_code(std::size_t index) {
  if (index >= kClassCount) {
    throw ArgumentError("class index " + std::to_string(index) + " is outside 0.." +
                        std::to_string(kClassCount - 1));
  }
  return kClassCodes[index];
}

std::size_t parse_class_code(std::string_view code) {
  for (std::size_t i = 0; i < kClassCount; ++i) {
    if (kClassCodes[i] == code) return i;
  }
  throw ArgumentError("unknown class code '" + std::string(code) + "'");
}

bool is_distribution(const LabelDistribution& p, double tolerance) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    total += v;
  }
  return std::abs(total - 1.0) <= tolerance;
}

std::size_t argmax(std::span<const double> p) {
  return static_cast<std::size_t>(std::distance(p.begin(), std::max_element(p.begin(), p.end())));
}

double kl_divergence(const LabelDistribution& p, const LabelDistribution& q, double floor) {
  double kl = 0.0;
  for (std::size_t k = 0; k < kClassCount; ++k) {
    if (p[k] <= 0.0) continue;
    kl += p[k] * (std::log(p[k]) - std::log(std::max(q[k], floor)));
  }
  return kl;
}

std::string format_distribution(const LabelDistribution& p) {
  std::string out = "[";
  char buf[32];
  for (std::size_t k = 0; k < kClassCount; ++k) {
    std::snprintf(buf, sizeof buf, k ? ", %.6g" : "%.6g", p[k]);
    out += buf;
  }
  return out + "]";
}

}  // namespace dbls
