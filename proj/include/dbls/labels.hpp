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
#include <span>
#include <string>
#include <string_view>

namespace dbls {

/// The five suicide-risk classes, ordered by severity.
inline constexpr std::size_t kClassCount = 5;

enum class RiskClass : std::size_t {
  supportive = 0,  // SU
  indicator = 1,   // IN
  ideation = 2,    // ID
  behaviour = 3,   // SB
  attempt = 4,     // AT
};

inline constexpr std::array<std::string_view, kClassCount> kClassCodes = {"SU", "IN", "ID", "SB",
                                                                         "AT"};

std::string_view class_code(std::size_t index);

/// Index for a two-letter code; throws ArgumentError on anything else.
std::size_t parse_class_code(std::string_view code);

/// Probability vector over the five classes, soft or hard.
using LabelDistribution = std::array<double, kClassCount>;

/// Non-negative entries summing to 1 within `tolerance`.
bool is_distribution(const LabelDistribution& p, double tolerance = 1e-9);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> p);

inline std::size_t argmax(const LabelDistribution& p) { return argmax(std::span<const double>(p)); }

/// KL(p || q) with q clamped below at `floor` before the log.
double kl_divergence(const LabelDistribution& p, const LabelDistribution& q,
                     double floor = 1e-12);

std::string format_distribution(const LabelDistribution& p);

}  // namespace dbls
