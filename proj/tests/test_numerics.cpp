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
#include <numeric>
#include <set>
#include <string>

#include "doctest.h"
#include "dbls/error.hpp"
#include "dbls/layers.hpp"
#include "dbls/loss.hpp"
#include "dbls/optim.hpp"
#include "dbls/rng.hpp"
#include "dbls/tensor.hpp"
#include "oracle.hpp"

using namespace dbls;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
  Tensor t({2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.at(1, 2) == 1.5);
  CHECK(element_count({2, 3, 4}) == 24);
  CHECK(shape_string({2, 3}) == "[2x3]");
  CHECK_THROWS_AS(Tensor({2, 0}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(t.reshaped({4, 2}), DimensionError);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
  CHECK_THROWS_AS(t.dim(2), DimensionError);
  t[0] = std::nan("");
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);

  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.index(5) < 5);
  }
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));

  const Rng parent(9);
  Rng f1 = parent.fork(3), f2 = parent.fork(3);
  CHECK(f1.next_u64() == f2.next_u64());

  std::vector<int> items(20);
  std::iota(items.begin(), items.end(), 0);
  auto copy = items;
  Rng s1(5), s2(5);
  shuffle(items, s1);
  shuffle(copy, s2);
  CHECK(items == copy);
  CHECK(std::set<int>(items.begin(), items.end()).size() == 20);
}

TEST_CASE("rng categorical follows its weights") {
  Rng r(11);
  std::array<double, 3> w{0.2, 0.0, 0.8};
  std::array<int, 3> counts{};
  for (int i = 0; i < 20000; ++i) ++counts[r.categorical(w)];
  CHECK(counts[1] == 0);
  CHECK(counts[0] / 20000.0 == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("dense forward examples") {
  CHECK(dense_forward(Tensor::vector({1, 0}), Tensor::matrix({{1, 0}, {0, 1}}),
                      Tensor::vector({0, 0}), Activation::identity) == Tensor::vector({1, 0}));
  const Tensor s = dense_forward(Tensor::vector({0, 0}), Tensor::matrix({{3, -2}, {0.5, 7}}),
                                 Tensor::vector({0, 0}), Activation::softmax);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[1] == doctest::Approx(0.5));
  const Tensor g = dense_forward(Tensor::vector({1, 2}), Tensor::matrix({{1}, {1}}),
                                 Tensor::vector({0.5}), Activation::sigmoid);
  CHECK(g[0] == doctest::Approx(0.97068).epsilon(1e-5));
  CHECK(g[0] == doctest::Approx(oracle::sigmoid(3.5)).epsilon(1e-15));
}

TEST_CASE("dense shape errors name both shapes") {
  try {
    dense_forward(Tensor::vector({1, 2, 3}), Tensor({2, 2}), Tensor({2}), Activation::identity);
    FAIL("expected a dimension error");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[3]") != std::string::npos);
    CHECK(msg.find("[2x2]") != std::string::npos);
    CHECK(e.kind() == "dimension");
  }
  CHECK_THROWS_AS(dense_forward(Tensor::vector({1, 2}), Tensor({2, 2}), Tensor({3}),
                                Activation::identity),
                  DimensionError);
}

TEST_CASE("softmax rows are distributions") {
  Rng r(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor z = random_tensor({4, 5}, r, -10, 10);
    const Tensor p = activate(z, Activation::softmax);
    for (std::size_t row = 0; row < 4; ++row) {
      double sum = 0;
      for (double v : p.row(row)) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("softmax saturates without producing NaN") {
  const Tensor p = activate(Tensor::vector({800, -800, 0}), Activation::softmax);
  CHECK(p.all_finite());
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
}

TEST_CASE("softmax is shift invariant") {
  Rng r(4);
  const Tensor z = random_tensor({1, 5}, r, -3, 3);
  Tensor shifted = z;
  for (auto& v : shifted.data()) v += 123.0;
  const Tensor a = activate(z, Activation::softmax);
  const Tensor b = activate(shifted, Activation::softmax);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("conv1d forward examples") {
  const Tensor ones({4, 1}, 1.0);
  CHECK(conv1d_forward(ones, Tensor({1, 1, 1}, 1.0), Tensor({1}, 0.0), Activation::identity) ==
        ones);
  const Tensor in({4, 1}, std::vector<double>{1, 2, 3, 4});
  const Tensor out = conv1d_forward(in, Tensor({2, 1, 1}, 1.0), Tensor({1}), Activation::identity);
  CHECK(out == Tensor({3, 1}, std::vector<double>{3, 5, 7}));
  const Tensor zero_in({3, 2}, 0.0);
  const Tensor b = conv1d_forward(zero_in, Tensor({2, 2, 3}, 0.7), Tensor::vector({1, -2, 3}),
                                  Activation::identity);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(b.at(t, 0) == 1);
    CHECK(b.at(t, 1) == -2);
    CHECK(b.at(t, 2) == 3);
  }
  CHECK_THROWS_AS(conv1d_forward(Tensor({2, 1}), Tensor({3, 1, 1}), Tensor({1}),
                                 Activation::identity),
                  DimensionError);
}

TEST_CASE("conv1d output length and oracle agreement") {
  Rng r(5);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t len = 1 + r.index(12);
    const std::size_t w = 1 + r.index(len);
    const std::size_t ch = 1 + r.index(4);
    const std::size_t f = 1 + r.index(4);
    const Tensor in = random_tensor({len, ch}, r);
    const Tensor k = random_tensor({w, ch, f}, r);
    const Tensor b = random_tensor({f}, r);
    const Tensor out = conv1d_forward(in, k, b, Activation::identity);
    REQUIRE(out.dim(0) == len - w + 1);
    const Tensor want = oracle::conv1d(in, k, b);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("maxpool examples") {
  const auto a = maxpool1d_forward(Tensor({4, 1}, 5.0), 2);
  CHECK(a.output == Tensor({2, 1}, 5.0));
  const auto b = maxpool1d_forward(Tensor({4, 1}, std::vector<double>{1, 3, 2, 8}), 2);
  CHECK(b.output == Tensor({2, 1}, std::vector<double>{3, 8}));
  CHECK(b.argmax == std::vector<std::size_t>{1, 3});
  const auto c = maxpool1d_forward(Tensor({1, 1}, 7.0), 1);
  CHECK(c.output == Tensor({1, 1}, 7.0));
  const auto partial = maxpool1d_forward(Tensor({5, 1}, std::vector<double>{1, 2, 3, 4, 9}), 2);
  CHECK(partial.output == Tensor({3, 1}, std::vector<double>{2, 4, 9}));
  CHECK_THROWS_AS(maxpool1d_forward(Tensor({4, 1}), 0), ArgumentError);
  CHECK_THROWS_AS(maxpool1d_forward(Tensor({4, 1}), -2), ArgumentError);
}

TEST_CASE("embedding examples") {
  const Tensor table = Tensor::matrix({{1, 2}, {3, 4}});
  const std::vector<TokenId> zz{0, 0};
  CHECK(embedding_forward(zz, table) == Tensor::matrix({{1, 2}, {1, 2}}));
  const std::vector<TokenId> ten{1, 0};
  CHECK(embedding_forward(ten, table) == Tensor::matrix({{3, 4}, {1, 2}}));
  const Tensor padded = Tensor::matrix({{0, 0}, {3, 4}});
  CHECK(embedding_forward(zz, padded) == Tensor({2, 2}, 0.0));
  const std::vector<TokenId> bad{0, 7};
  try {
    embedding_forward(bad, table);
    FAIL("expected a vocabulary error");
  } catch (const VocabularyError& e) {
    CHECK(std::string(e.what()).find('7') != std::string::npos);
  }
}

TEST_CASE("embedding accumulate skips the padding row") {
  const std::vector<TokenId> ids{0, 2, 2};
  Tensor grad({3, 2}, 0.0);
  embedding_accumulate(ids, Tensor({3, 2}, 1.0), grad, TokenId{0});
  CHECK(grad.at(0, 0) == 0.0);
  CHECK(grad.at(2, 1) == 2.0);
}

TEST_CASE("dropout examples") {
  Rng r(1);
  const Tensor x = Tensor::vector({2, 4});
  const DropoutMask none = DropoutMask::draw(2, 0.0, r);
  CHECK(std::all_of(none.keep.begin(), none.keep.end(), [](auto k) { return k == 1; }));
  for (auto mode : {DropoutMode::train, DropoutMode::mc_inference, DropoutMode::off}) {
    CHECK(dropout_apply(x, none, mode) == x);
  }
  const DropoutMask first{{1, 0}, 0.5};
  CHECK(dropout_apply(x, first, DropoutMode::train) == Tensor::vector({4, 0}));
  CHECK(dropout_apply(x, first, DropoutMode::mc_inference) == Tensor::vector({4, 0}));
  CHECK(dropout_apply(x, first, DropoutMode::off) == x);
  CHECK_THROWS_AS(DropoutMask::draw(3, 1.0, r), ArgumentError);
  CHECK_THROWS_AS(DropoutMask::draw(3, -0.1, r), ArgumentError);
  CHECK_THROWS_AS(dropout_apply(x, DropoutMask{{1, 1, 1}, 0.5}, DropoutMode::train),
                  DimensionError);
}

TEST_CASE("inverted dropout preserves the expectation") {
  for (double rate : {0.1, 0.5, 0.8}) {
    Rng r(static_cast<std::uint64_t>(rate * 100));
    const std::size_t width = 8;
    const Tensor x(Shape{width}, 3.0);
    Tensor sum(Shape{width}, 0.0);
    const int passes = 20000;
    for (int p = 0; p < passes; ++p) {
      const Tensor y = dropout_apply(x, DropoutMask::draw(width, rate, r), DropoutMode::train);
      for (std::size_t i = 0; i < width; ++i) sum[i] += y[i];
    }
    for (std::size_t i = 0; i < width; ++i) {
      CHECK(std::abs(sum[i] / passes - 3.0) / 3.0 <= 0.02);
    }
  }
}

TEST_CASE("dropout masks are Bernoulli(1 - rate)") {
  Rng r(77);
  const DropoutMask m = DropoutMask::draw(100000, 0.3, r);
  const double kept = std::accumulate(m.keep.begin(), m.keep.end(), 0.0) / 100000.0;
  CHECK(kept == doctest::Approx(0.7).epsilon(0.01));
}

TEST_CASE("cross-entropy examples") {
  const Tensor hot = Tensor::vector({0, 0, 1, 0, 0});
  CHECK(cce_loss(hot, hot) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cce_loss(Tensor::vector({0.5, 0.5}), Tensor::vector({1, 0})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(cce_loss(Tensor::vector({0.5, 0.5}), Tensor::vector({1, 0})) ==
        doctest::Approx(0.6931).epsilon(1e-4));
  const Tensor smooth = Tensor::vector({0.9, 0.025, 0.025, 0.025, 0.025});
  const double entropy = -0.9 * std::log(0.9) - 0.1 * std::log(0.025);
  CHECK(cce_loss(smooth, smooth) == doctest::Approx(entropy).epsilon(1e-12));
  CHECK(std::abs(cce_loss(smooth, smooth) - 0.4632) < 1e-3);
  // Zero probability on the target is clamped, not infinite.
  CHECK(cce_loss(Tensor::vector({0, 1}), Tensor::vector({1, 0})) ==
        doctest::Approx(-std::log(kLogClamp)));
  CHECK_THROWS_AS(cce_loss(Tensor::vector({0.5, 0.5}), Tensor::vector({1, 0, 0})), DimensionError);
  CHECK_THROWS_AS(cce_loss(Tensor::vector({0.5, 0.6}), Tensor::vector({1, 0})), ArgumentError);
}

TEST_CASE("cross-entropy on hard targets is non-negative") {
  Rng r(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor p = activate(random_tensor({3, 5}, r, -4, 4), Activation::softmax);
    Tensor y({3, 5}, 0.0);
    for (std::size_t b = 0; b < 3; ++b) y.at(b, r.index(5)) = 1.0;
    CHECK(cce_loss(p, y) >= 0.0);
  }
}

TEST_CASE("fused softmax cross-entropy gradient is p - y") {
  const Tensor p = Tensor::matrix({{0.7, 0.2, 0.1}});
  const Tensor y = Tensor::matrix({{0, 1, 0}});
  const Tensor g = softmax_cce_gradient(p, y);
  CHECK(g.at(0, 0) == doctest::Approx(0.7));
  CHECK(g.at(0, 1) == doctest::Approx(-0.8));
  CHECK(g.at(0, 2) == doctest::Approx(0.1));
}

TEST_CASE("dense backward with zero upstream is zero") {
  Rng r(9);
  const Tensor x = random_tensor({3, 4}, r);
  const Tensor w = random_tensor({4, 2}, r);
  const Tensor b = random_tensor({2}, r);
  const Tensor out = dense_forward(x, w, b, Activation::sigmoid);
  const LayerGrads g = dense_backward(x, w, out, Activation::sigmoid, Tensor({3, 2}, 0.0));
  for (const auto& t : g.params) {
    for (double v : t.data()) CHECK(v == 0.0);
  }
  for (double v : g.input.data()) CHECK(v == 0.0);
}

TEST_CASE("layer objects refuse backward before forward") {
  CHECK_THROWS_AS(DenseLayer(Activation::relu).backward(Tensor({1, 1})), StateError);
  CHECK_THROWS_AS(Conv1dLayer(Activation::relu).backward(Tensor({1, 1})), StateError);
  CHECK_THROWS_AS(MaxPool1dLayer(2).backward(Tensor({1, 1})), StateError);
  CHECK_THROWS_AS(EmbeddingLayer().backward(Tensor({1, 1})), StateError);
  CHECK_THROWS_AS(DropoutLayer(DropoutMode::train).backward(Tensor({1})), StateError);

  DenseLayer d(Activation::identity);
  d.forward(Tensor::vector({1, 2}), Tensor::matrix({{1}, {1}}), Tensor::vector({0}));
  CHECK_NOTHROW(d.backward(Tensor::vector({1})));
  d.reset();
  CHECK_THROWS_AS(d.backward(Tensor::vector({1})), StateError);
}

TEST_CASE("layer gradients mirror parameter shapes") {
  Rng r(10);
  const Tensor x = random_tensor({6, 3}, r);
  const Tensor k = random_tensor({2, 3, 4}, r);
  const Tensor b = random_tensor({4}, r);
  Conv1dLayer conv(Activation::relu);
  const Tensor out = conv.forward(x, k, b);
  const LayerGrads g = conv.backward(random_tensor(out.shape(), r));
  REQUIRE(g.params.size() == 2);
  CHECK(g.params[0].shape() == k.shape());
  CHECK(g.params[1].shape() == b.shape());
  CHECK(g.input.shape() == x.shape());
}

TEST_CASE("forward and backward ops are deterministic") {
  Rng r(12);
  const Tensor x = random_tensor({5, 2}, r);
  const Tensor k = random_tensor({3, 2, 2}, r);
  const Tensor b = random_tensor({2}, r);
  const Tensor up = random_tensor({3, 2}, r);
  const Tensor o1 = conv1d_forward(x, k, b, Activation::relu);
  const Tensor o2 = conv1d_forward(x, k, b, Activation::relu);
  CHECK(o1 == o2);
  const auto g1 = conv1d_backward(x, k, o1, Activation::relu, up);
  const auto g2 = conv1d_backward(x, k, o2, Activation::relu, up);
  CHECK(g1.params[0] == g2.params[0]);
  CHECK(g1.input == g2.input);
  Rng m1(3), m2(3);
  CHECK(DropoutMask::draw(50, 0.5, m1).keep == DropoutMask::draw(50, 0.5, m2).keep);
}

TEST_CASE("sgd step examples") {
  std::vector<Tensor> params{Tensor::vector({1.0, -2.0})};
  const std::vector<Tensor> grads{Tensor::vector({0.5, 1.0})};
  sgd_step(params, grads, 0.0);
  CHECK(params[0] == Tensor::vector({1.0, -2.0}));
  sgd_step(params, grads, 0.1);
  CHECK(params[0][0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(params[0][1] == doctest::Approx(-2.1).epsilon(1e-15));
  CHECK_THROWS_AS(sgd_step(params, grads, -1.0), ArgumentError);
}

TEST_CASE("sgd step decreases a convex quadratic") {
  // loss(w) = 0.5 * |w - c|^2, gradient w - c.
  Rng r(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Tensor> w{random_tensor({4}, r, -5, 5)};
    const Tensor c = random_tensor({4}, r, -5, 5);
    auto loss = [&] {
      double s = 0;
      for (std::size_t i = 0; i < 4; ++i) s += 0.5 * (w[0][i] - c[i]) * (w[0][i] - c[i]);
      return s;
    };
    std::vector<Tensor> g{Tensor({4})};
    for (std::size_t i = 0; i < 4; ++i) g[0][i] = w[0][i] - c[i];
    const double before = loss();
    sgd_step(w, g, 0.1);
    CHECK(loss() < before);
  }
}

TEST_CASE("sgd refuses non-finite gradients and names the layer") {
  std::vector<Tensor> params{Tensor::vector({1.0}), Tensor::vector({2.0})};
  const std::vector<Tensor> grads{Tensor::vector({0.5}), Tensor::vector({INFINITY})};
  const std::vector<std::string> names{"dense_weights", "dense_bias"};
  try {
    sgd_step(params, grads, 0.1, names);
    FAIL("expected a training error");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("dense_bias") != std::string::npos);
  }
  CHECK(params[0][0] == 1.0);
}
