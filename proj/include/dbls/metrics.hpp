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
#include <span>
#include <string>
#include <vector>

#include "dbls/labels.hpp"

namespace dbls {

/// Counts of (true class, predicted class) pairs. Rows are the true class,
/// columns the prediction, both in SU, IN, ID, SB, AT order for the
/// five-class scheme.
class ConfusionMatrix {
 public:
  ConfusionMatrix() : ConfusionMatrix(kClassCount) {}
  explicit ConfusionMatrix(std::size_t classes);

  /// Square grid of counts, counts[true][predicted].
  static ConfusionMatrix from_counts(const std::vector<std::vector<std::size_t>>& counts);

  void add(std::size_t truth, std::size_t predicted, std::size_t count = 1);

  std::size_t classes() const noexcept { return classes_; }
  std::size_t count(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_ + predicted];
  }
  std::size_t total() const noexcept { return total_; }
  std::size_t row_total(std::size_t truth) const;
  std::size_t column_total(std::size_t predicted) const;
  std::size_t correct() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t classes = kClassCount);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// Empty denominators (a class never predicted, or never present) give 0
// rather than NaN.

PrecisionRecall precision_recall(const ConfusionMatrix& m, std::size_t k);
double f1_score(const ConfusionMatrix& m, std::size_t k);
double accuracy(const ConfusionMatrix& m);
double macro_precision(const ConfusionMatrix& m);
double macro_recall(const ConfusionMatrix& m);
double micro_precision(const ConfusionMatrix& m);

enum class WbaWeighting {
  /// Recall weighted by 1 / w_k with w_k the class's share of true labels;
  /// classes absent from the truth are skipped.
  inverse_frequency,
  /// Plain balanced accuracy (macro recall).
  uniform,
};

/// Throws ArgumentError when the matrix holds no examples.
double weighted_balanced_accuracy(const ConfusionMatrix& m,
                                  WbaWeighting weighting = WbaWeighting::inverse_frequency);

struct MetricsReport {
  ConfusionMatrix matrix;
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double micro_precision = 0.0;
  double weighted_balanced_accuracy = 0.0;
};

MetricsReport report(const ConfusionMatrix& m,
                     WbaWeighting weighting = WbaWeighting::inverse_frequency);

MetricsReport report(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                     std::size_t classes = kClassCount,
                     WbaWeighting weighting = WbaWeighting::inverse_frequency);

/// "accuracy,weighted_balanced_accuracy,macro_precision,macro_recall,micro_precision"
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& r);

}  // namespace dbls
