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

#include <cmath>
#include <string>

#include "doctest.h"
#include "dbls/layers.hpp"
#include "dbls/loss.hpp"
#include "dbls/model.hpp"
#include "oracle.hpp"

using namespace dbls;

namespace {

constexpr int kTrials = 120;
constexpr double kTolerance = 1e-4;

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_close(const Tensor& analytic, const Tensor& numeric, const std::string& what) {
  INFO(what);
  CHECK(oracle::relative_error(analytic, numeric) <= kTolerance);
}

}  // namespace

TEST_CASE("dense gradients match finite differences") {
  Rng r(101);
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto act = static_cast<Activation>(trial % 4);
    const std::size_t batch = 1 + r.index(3), in = 1 + r.index(4), out = 1 + r.index(4) + 1;
    Tensor x = random_tensor({batch, in}, r);
    Tensor w = random_tensor({in, out}, r);
    Tensor b = random_tensor({out}, r);
    const Tensor probe = random_tensor({batch, out}, r);
    auto loss = [&] { return dot(dense_forward(x, w, b, act), probe); };
    const Tensor y = dense_forward(x, w, b, act);
    const LayerGrads g = dense_backward(x, w, y, act, probe);
    const std::string tag = "dense " + std::string(to_string(act));
    check_close(g.params[0], oracle::numeric_gradient(w, loss), tag + " weights");
    check_close(g.params[1], oracle::numeric_gradient(b, loss), tag + " bias");
    check_close(g.input, oracle::numeric_gradient(x, loss), tag + " input");
  }
}

TEST_CASE("conv1d gradients match finite differences") {
  Rng r(102);
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto act = trial % 2 ? Activation::relu : Activation::identity;
    const std::size_t len = 2 + r.index(6), ch = 1 + r.index(3), f = 1 + r.index(3);
    const std::size_t w = 1 + r.index(len);
    Tensor x = random_tensor({len, ch}, r);
    Tensor k = random_tensor({w, ch, f}, r);
    Tensor b = random_tensor({f}, r);
    const Tensor probe = random_tensor({len - w + 1, f}, r);
    auto loss = [&] { return dot(conv1d_forward(x, k, b, act), probe); };
    const Tensor y = conv1d_forward(x, k, b, act);
    const LayerGrads g = conv1d_backward(x, k, y, act, probe);
    check_close(g.params[0], oracle::numeric_gradient(k, loss), "conv kernels");
    check_close(g.params[1], oracle::numeric_gradient(b, loss), "conv bias");
    check_close(g.input, oracle::numeric_gradient(x, loss), "conv input");
  }
}

TEST_CASE("maxpool gradients match finite differences") {
  Rng r(103);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t len = 1 + r.index(8), f = 1 + r.index(3);
    const long width = 1 + static_cast<long>(r.index(len));
    Tensor x = random_tensor({len, f}, r);
    const auto pooled = maxpool1d_forward(x, width);
    const Tensor probe = random_tensor(pooled.output.shape(), r);
    auto loss = [&] { return dot(maxpool1d_forward(x, width).output, probe); };
    const Tensor g = maxpool1d_backward(x.shape(), pooled.argmax, probe);
    check_close(g, oracle::numeric_gradient(x, loss), "maxpool input");
  }
}

TEST_CASE("embedding gradients match finite differences") {
  Rng r(104);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t vocab = 2 + r.index(5), dim = 1 + r.index(3), len = 1 + r.index(6);
    std::vector<TokenId> ids(len);
    for (auto& id : ids) id = static_cast<TokenId>(r.index(vocab));
    Tensor table = random_tensor({vocab, dim}, r);
    const Tensor probe = random_tensor({len, dim}, r);
    auto loss = [&] { return dot(embedding_forward(ids, table), probe); };
    const Tensor g = embedding_backward(ids, table.shape(), probe);
    check_close(g, oracle::numeric_gradient(table, loss), "embedding table");
  }
}

TEST_CASE("dropout gradients match finite differences") {
  Rng r(105);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t width = 1 + r.index(6);
    const double rate = r.uniform(0.0, 0.9);
    const DropoutMask mask = DropoutMask::draw(width, rate, r);
    Tensor x = random_tensor({2, width}, r);
    const Tensor probe = random_tensor({2, width}, r);
    const auto mode = trial % 2 ? DropoutMode::train : DropoutMode::mc_inference;
    auto loss = [&] { return dot(dropout_apply(x, mask, mode), probe); };
    const Tensor g = dropout_backward(probe, mask, mode);
    check_close(g, oracle::numeric_gradient(x, loss), "dropout input");
  }
}

TEST_CASE("softmax cross-entropy gradient matches finite differences") {
  Rng r(106);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t batch = 1 + r.index(4), k = 2 + r.index(4);
    Tensor z = random_tensor({batch, k}, r, -3, 3);
    const Tensor target = activate(random_tensor({batch, k}, r, -2, 2), Activation::softmax);
    auto loss = [&] { return cce_loss(activate(z, Activation::softmax), target); };
    const Tensor g = softmax_cce_gradient(activate(z, Activation::softmax), target);
    check_close(g, oracle::numeric_gradient(z, loss), "softmax cce logits");

    Tensor p = activate(random_tensor({batch, k}, r), Activation::softmax);
    auto direct = [&] {
      double s = 0;
      for (std::size_t i = 0; i < p.size(); ++i) s -= target[i] * std::log(p[i]);
      return s / static_cast<double>(batch);
    };
    check_close(cce_gradient(p, target), oracle::numeric_gradient(p, direct), "cce probabilities");
  }
}

TEST_CASE("whole-model gradients match finite differences") {
  Rng r(107);
  for (int trial = 0; trial < kTrials; ++trial) {
    ModelConfig cfg;
    cfg.vocab_size = 3 + r.index(4);
    cfg.emb_dim = 1 + r.index(3);
    cfg.max_len = 4 + r.index(4);
    cfg.conv1_width = 1 + r.index(3);
    cfg.conv1_filters = 1 + r.index(3);
    cfg.conv2_width = 1 + r.index(2);
    cfg.conv2_filters = 1 + r.index(3);
    cfg.pool_width = r.index(3);
    cfg.dropout_rate = trial % 3 == 0 ? 0.0 : 0.4;
    cfg.validate();

    Rng init(static_cast<std::uint64_t>(trial) + 1000);
    ModelParams params = ModelParams::initialize(cfg, init);
    // Biases away from zero keep ReLU units off their kink.
    for (auto* t : {&params.conv1_bias, &params.conv2_bias, &params.dense_bias}) {
      for (auto& v : t->data()) v = r.uniform(-0.5, 0.5);
    }

    std::vector<LabeledPost> batch(1 + r.index(3));
    std::vector<DropoutMask> masks;
    for (auto& ex : batch) {
      ex.post.ids.resize(cfg.max_len, kPadId);
      ex.post.true_length = 1 + r.index(cfg.max_len);
      for (std::size_t t = 0; t < ex.post.true_length; ++t) {
        ex.post.ids[t] = static_cast<TokenId>(1 + r.index(cfg.vocab_size - 1));
      }
      LabelDistribution raw{};
      double sum = 0;
      for (auto& v : raw) sum += (v = r.uniform(0.01, 1.0));
      for (auto& v : raw) v /= sum;
      ex.label = raw;
      masks.push_back(DropoutMask::draw(cfg.flatten_dim(), cfg.dropout_rate, r));
    }

    const BatchGradient analytic = compute_gradient(params, cfg, batch, masks);
    CHECK(analytic.loss == doctest::Approx(batch_loss(params, cfg, batch, masks)).epsilon(1e-12));
    auto loss = [&] { return batch_loss(params, cfg, batch, masks); };
    const auto param_tensors = params.tensors();
    const auto grad_tensors = analytic.grads.tensors();
    for (std::size_t i = 0; i < param_tensors.size(); ++i) {
      Tensor numeric = oracle::numeric_gradient(*param_tensors[i], loss);
      Tensor got = *grad_tensors[i];
      if (i == 0) {
        // The padding row is frozen.
        for (std::size_t d = 0; d < cfg.emb_dim; ++d) {
          CHECK(got.at(0, d) == 0.0);
          numeric.at(0, d) = 0.0;
        }
      }
      check_close(got, numeric, std::string(ModelParams::kNames[i]));
    }
  }
}
