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

// Straightforward re-derivations used to cross-check the library. Nothing in
// here calls into the code under test except the Tensor container.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "dbls/tensor.hpp"

namespace oracle {

struct Metrics {
  double accuracy = 0;
  std::vector<double> precision, recall, f1;
  double macro_precision = 0, macro_recall = 0, micro_precision = 0, wba = 0;
};

inline Metrics metrics(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred,
                       std::size_t k) {
  Metrics m;
  const double n = static_cast<double>(truth.size());
  double correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == pred[i];
  m.accuracy = correct / n;
  double tp_sum = 0, col_sum = 0;
  double num = 0, den = 0;
  for (std::size_t c = 0; c < k; ++c) {
    double tp = 0, fp = 0, fn = 0, nc = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == c && pred[i] == c) tp += 1;
      if (truth[i] != c && pred[i] == c) fp += 1;
      if (truth[i] == c && pred[i] != c) fn += 1;
      if (truth[i] == c) nc += 1;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.precision.push_back(p);
    m.recall.push_back(r);
    m.f1.push_back(p + r > 0 ? 2 * p * r / (p + r) : 0.0);
    m.macro_precision += p / static_cast<double>(k);
    m.macro_recall += r / static_cast<double>(k);
    tp_sum += tp;
    col_sum += tp + fp;
    if (nc > 0) {
      const double w = nc / n;
      num += r / w;
      den += 1 / w;
    }
  }
  m.micro_precision = tp_sum / col_sum;
  m.wba = num / den;
  return m;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// out[t][f] = b[f] + sum_{j,c} in[t + j][c] * k[j][c][f]
inline dbls::Tensor conv1d(const dbls::Tensor& in, const dbls::Tensor& k, const dbls::Tensor& b) {
  const std::size_t len = in.dim(0), ch = in.dim(1), w = k.dim(0), f = k.dim(2);
  dbls::Tensor out({len - w + 1, f});
  for (std::size_t t = 0; t + w <= len; ++t) {
    for (std::size_t o = 0; o < f; ++o) {
      double s = b[o];
      for (std::size_t j = 0; j < w; ++j) {
        for (std::size_t c = 0; c < ch; ++c) s += in.at(t + j, c) * k.at(j, c, o);
      }
      out.at(t, o) = s;
    }
  }
  return out;
}

// Central-difference gradient of f with respect to every entry of x.
inline dbls::Tensor numeric_gradient(dbls::Tensor& x, const std::function<double()>& f,
                                     double eps = 1e-5) {
  dbls::Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = f();
    x[i] = saved - eps;
    const double down = f();
    x[i] = saved;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

inline double relative_error(const dbls::Tensor& a, const dbls::Tensor& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(na) + std::sqrt(nb);
  return scale < 1e-8 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

}  // namespace oracle
