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

#include "dbls/metrics.hpp"

#include <cstdio>

#include "dbls/error.hpp"

namespace dbls {

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw ArgumentError("confusion matrix needs at least one class");
}

ConfusionMatrix ConfusionMatrix::from_counts(const std::vector<std::vector<std::size_t>>& counts) {
  ConfusionMatrix m(counts.size());
  for (std::size_t t = 0; t < counts.size(); ++t) {
    if (counts[t].size() != counts.size()) {
      throw ArgumentError("confusion counts must be square, row " + std::to_string(t) + " has " +
                          std::to_string(counts[t].size()) + " entries");
    }
    for (std::size_t p = 0; p < counts.size(); ++p) m.add(t, p, counts[t][p]);
  }
  return m;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::size_t count) {
  if (truth >= classes_ || predicted >= classes_) {
    throw ArgumentError("class pair (" + std::to_string(truth) + ", " + std::to_string(predicted) +
                        ") is outside a " + std::to_string(classes_) + "-class matrix");
  }
  counts_[truth * classes_ + predicted] += count;
  total_ += count;
}

std::size_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::size_t n = 0;
  for (std::size_t p = 0; p < classes_; ++p) n += count(truth, p);
  return n;
}

std::size_t ConfusionMatrix::column_total(std::size_t predicted) const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < classes_; ++t) n += count(t, predicted);
  return n;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < classes_; ++k) n += count(k, k);
  return n;
}

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t classes) {
  if (truth.size() != predicted.size()) {
    throw ArgumentError("confusion: " + std::to_string(truth.size()) + " true labels but " +
                        std::to_string(predicted.size()) + " predictions");
  }
  if (truth.empty()) throw ArgumentError("confusion: no examples");
  ConfusionMatrix m(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
  return m;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

PrecisionRecall precision_recall(const ConfusionMatrix& m, std::size_t k) {
  if (k >= m.classes()) throw ArgumentError("class " + std::to_string(k) + " out of range");
  const std::size_t tp = m.count(k, k);
  // TP + FP is the column total, TP + FN the row total.
  return {ratio(tp, m.column_total(k)), ratio(tp, m.row_total(k))};
}

double f1_score(const ConfusionMatrix& m, std::size_t k) {
  const auto [p, r] = precision_recall(m, k);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double accuracy(const ConfusionMatrix& m) { return ratio(m.correct(), m.total()); }

double macro_precision(const ConfusionMatrix& m) {
  double sum = 0.0;
  for (std::size_t k = 0; k < m.classes(); ++k) sum += precision_recall(m, k).precision;
  return sum / static_cast<double>(m.classes());
}

double macro_recall(const ConfusionMatrix& m) {
  double sum = 0.0;
  for (std::size_t k = 0; k < m.classes(); ++k) sum += precision_recall(m, k).recall;
  return sum / static_cast<double>(m.classes());
}

double micro_precision(const ConfusionMatrix& m) {
  std::size_t columns = 0;
  for (std::size_t k = 0; k < m.classes(); ++k) columns += m.column_total(k);
  return ratio(m.correct(), columns);
}

double weighted_balanced_accuracy(const ConfusionMatrix& m, WbaWeighting weighting) {
  if (m.total() == 0) throw ArgumentError("weighted balanced accuracy of an empty matrix");
  if (weighting == WbaWeighting::uniform) return macro_recall(m);
  const double n = static_cast<double>(m.total());
  double weighted = 0.0;
  double norm = 0.0;
  for (std::size_t k = 0; k < m.classes(); ++k) {
    const std::size_t nk = m.row_total(k);
    if (nk == 0) continue;
    const double inverse_weight = n / static_cast<double>(nk);
    weighted += precision_recall(m, k).recall * inverse_weight;
    norm += inverse_weight;
  }
  return weighted / norm;
}

MetricsReport report(const ConfusionMatrix& m, WbaWeighting weighting) {
  MetricsReport r;
  r.matrix = m;
  r.accuracy = accuracy(m);
  for (std::size_t k = 0; k < m.classes(); ++k) {
    const auto pr = precision_recall(m, k);
    r.precision.push_back(pr.precision);
    r.recall.push_back(pr.recall);
    r.f1.push_back(f1_score(m, k));
  }
  r.macro_precision = macro_precision(m);
  r.macro_recall = macro_recall(m);
  r.micro_precision = micro_precision(m);
  r.weighted_balanced_accuracy = weighted_balanced_accuracy(m, weighting);
  return r;
}

MetricsReport report(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                     std::size_t classes, WbaWeighting weighting) {
  return report(confusion(truth, predicted, classes), weighting);
}

std::string metrics_csv_header() {
  return "accuracy,weighted_balanced_accuracy,macro_precision,macro_recall,micro_precision";
}

std::string metrics_csv_row(const MetricsReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.10f,%.10f,%.10f,%.10f,%.10f", r.accuracy,
                r.weighted_balanced_accuracy, r.macro_precision, r.macro_recall,
                r.micro_precision);
  return buf;
}

}  // namespace dbls
