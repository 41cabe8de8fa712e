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

#include "dbls/model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "dbls/error.hpp"
#include "dbls/loss.hpp"
#include "dbls/optim.hpp"

namespace dbls {

// --- configuration ---------------------------------------------------------

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigurationError("model config: " + what); };
  if (class_count != kClassCount) {
    fail("class_count must be " + std::to_string(kClassCount) + ", got " +
         std::to_string(class_count));
  }
  if (vocab_size < 3) fail("vocab_size must be at least 3, got " + std::to_string(vocab_size));
  if (emb_dim == 0 || conv1_filters == 0 || conv2_filters == 0) fail("layer widths must be positive");
  if (conv1_width == 0 || conv2_width == 0) fail("kernel widths must be positive");
  if (!(dropout_rate >= 0.0) || dropout_rate >= 1.0) {
    fail("dropout_rate must lie in [0, 1), got " + std::to_string(dropout_rate));
  }
  if (max_len < conv1_width + conv2_width - 1) {
    fail("max_len " + std::to_string(max_len) + " is shorter than the receptive field of width " +
         std::to_string(conv1_width + conv2_width - 1));
  }
}

std::size_t ModelConfig::pooled_length() const {
  const std::size_t w = effective_pool_width();
  return (conv2_length() + w - 1) / w;
}

std::size_t ModelConfig::parameter_count() const {
  return vocab_size * emb_dim + conv1_width * emb_dim * conv1_filters + conv1_filters +
         conv2_width * conv1_filters * conv2_filters + conv2_filters +
         flatten_dim() * class_count + class_count;
}

// --- parameters ------------------------------------------------------------

namespace {

std::array<Shape, 7> parameter_shapes(const ModelConfig& c) {
  return {Shape{c.vocab_size, c.emb_dim},
          Shape{c.conv1_width, c.emb_dim, c.conv1_filters},
          Shape{c.conv1_filters},
          Shape{c.conv2_width, c.conv1_filters, c.conv2_filters},
          Shape{c.conv2_filters},
          Shape{c.flatten_dim(), c.class_count},
          Shape{c.class_count}};
}

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& config) {
  config.validate();
  auto shapes = parameter_shapes(config);
  ModelParams p;
  auto slots = p.tensors();
  for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = Tensor(shapes[i]);
  return p;
}

ModelParams ModelParams::initialize(const ModelConfig& c, Rng& rng) {
  ModelParams p = zeros(c);
  glorot_fill(p.embedding, c.vocab_size, c.emb_dim, rng);
  for (std::size_t d = 0; d < c.emb_dim; ++d) p.embedding.at(kPadId, d) = 0.0;
  glorot_fill(p.conv1_kernels, c.conv1_width * c.emb_dim, c.conv1_width * c.conv1_filters, rng);
  glorot_fill(p.conv2_kernels, c.conv2_width * c.conv1_filters, c.conv2_width * c.conv2_filters,
              rng);
  glorot_fill(p.dense_weights, c.flatten_dim(), c.class_count, rng);
  return p;
}

std::array<Tensor*, 7> ModelParams::tensors() {
  return {&embedding, &conv1_kernels, &conv1_bias, &conv2_kernels,
          &conv2_bias, &dense_weights, &dense_bias};
}

std::array<const Tensor*, 7> ModelParams::tensors() const {
  return {&embedding, &conv1_kernels, &conv1_bias, &conv2_kernels,
          &conv2_bias, &dense_weights, &dense_bias};
}

void ModelParams::check_shapes(const ModelConfig& config) const {
  config.validate();
  auto shapes = parameter_shapes(config);
  auto slots = tensors();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]->shape() != shapes[i]) {
      throw ConfigurationError("parameter '" + std::string(kNames[i]) + "' has shape " +
                               shape_string(slots[i]->shape()) + ", config expects " +
                               shape_string(shapes[i]));
    }
  }
}

ModelParams sgd_step(const ModelParams& params, const ModelGrads& grads, double learning_rate) {
  ModelParams next = params;
  std::vector<Tensor> values;
  std::vector<Tensor> gradients;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < ModelParams::kNames.size(); ++i) {
    values.push_back(std::move(*next.tensors()[i]));
    gradients.push_back(*grads.tensors()[i]);
    names.emplace_back(ModelParams::kNames[i]);
  }
  sgd_step(values, gradients, learning_rate, names);
  for (std::size_t i = 0; i < values.size(); ++i) *next.tensors()[i] = std::move(values[i]);
  return next;
}

// --- forward ---------------------------------------------------------------

namespace {

// Everything the dropout site and dense head need, plus what backward needs
// for the convolutional trunk.
struct Trunk {
  Tensor embedded;
  Tensor conv1;
  Tensor conv2;
  std::vector<std::size_t> pool_argmax;
  Tensor flat;
};

void check_post(const ModelConfig& config, const EncodedPost& post) {
  if (post.ids.size() != config.max_len) {
    throw ConfigurationError("post has " + std::to_string(post.ids.size()) +
                             " ids but the model expects max_len " +
                             std::to_string(config.max_len));
  }
}

Trunk run_trunk(const ModelParams& p, const ModelConfig& c, const EncodedPost& post) {
  check_post(c, post);
  Trunk t;
  t.embedded = embedding_forward(post.ids, p.embedding);
  t.conv1 = conv1d_forward(t.embedded, p.conv1_kernels, p.conv1_bias, Activation::relu);
  t.conv2 = conv1d_forward(t.conv1, p.conv2_kernels, p.conv2_bias, Activation::relu);
  PoolResult pooled = maxpool1d_forward(t.conv2, static_cast<long>(c.effective_pool_width()));
  t.pool_argmax = std::move(pooled.argmax);
  t.flat = pooled.output.reshaped({c.flatten_dim()});
  return t;
}

LabelDistribution to_distribution(const Tensor& probs) {
  LabelDistribution out{};
  std::copy(probs.data().begin(), probs.data().end(), out.begin());
  return out;
}

LabelDistribution head(const ModelParams& p, const Tensor& features) {
  return to_distribution(dense_forward(features, p.dense_weights, p.dense_bias, Activation::softmax));
}

LabelDistribution masked_head(const ModelParams& p, const Tensor& flat, const DropoutMask& mask) {
  return head(p, dropout_apply(flat, mask, DropoutMode::mc_inference));
}

}  // namespace

LabelDistribution forward(const ModelParams& params, const ModelConfig& config,
                          const EncodedPost& post) {
  return head(params, run_trunk(params, config, post).flat);
}

LabelDistribution forward(const ModelParams& params, const ModelConfig& config,
                          const EncodedPost& post, Rng& dropout_rng) {
  Trunk t = run_trunk(params, config, post);
  return masked_head(params, t.flat, DropoutMask::draw(config.flatten_dim(), config.dropout_rate,
                                                       dropout_rng));
}

std::size_t predict_class(const ModelParams& params, const ModelConfig& config,
                          const EncodedPost& post) {
  return argmax(forward(params, config, post));
}

// --- gradients -------------------------------------------------------------

namespace {

void add_into(Tensor& dst, const Tensor& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

void scale(Tensor& t, double factor) {
  for (double& v : t.data()) v *= factor;
}

Tensor target_tensor(const LabelDistribution& label) {
  return Tensor({kClassCount}, std::vector<double>(label.begin(), label.end()));
}

void check_batch(const ModelConfig& config, std::span<const LabeledPost> batch,
                 std::span<const DropoutMask> masks) {
  if (batch.empty()) throw ArgumentError("empty batch");
  if (masks.size() != batch.size()) {
    throw DimensionError("batch of " + std::to_string(batch.size()) + " examples needs as many "
                         "dropout masks, got " + std::to_string(masks.size()));
  }
  for (const auto& m : masks) {
    if (m.width() != config.flatten_dim()) {
      throw DimensionError("dropout mask width " + std::to_string(m.width()) +
                           " does not match flatten_dim " + std::to_string(config.flatten_dim()));
    }
  }
}

// Adds d(loss_i)/d(params) into grads and returns loss_i.
double accumulate_example(const ModelParams& p, const ModelConfig& c, const LabeledPost& example,
                          const DropoutMask& mask, ModelGrads& grads) {
  Trunk t = run_trunk(p, c, example.post);
  const Tensor dropped = dropout_apply(t.flat, mask, DropoutMode::train);
  const Tensor probs = dense_forward(dropped, p.dense_weights, p.dense_bias, Activation::softmax);
  const Tensor target = target_tensor(example.label);
  const double loss = cce_loss(probs, target);

  // Softmax and cross-entropy fuse to (p - y) at the logits.
  const Tensor dlogits = softmax_cce_gradient(probs, target);
  LayerGrads dense = dense_backward(dropped, p.dense_weights, dlogits, Activation::identity, dlogits);
  add_into(grads.dense_weights, dense.params[0]);
  add_into(grads.dense_bias, dense.params[1]);

  const Tensor dflat = dropout_backward(dense.input, mask, DropoutMode::train);
  const Tensor dconv2 = maxpool1d_backward(t.conv2.shape(), t.pool_argmax,
                                           dflat.reshaped({c.pooled_length(), c.conv2_filters}));
  LayerGrads conv2 = conv1d_backward(t.conv1, p.conv2_kernels, t.conv2, Activation::relu, dconv2);
  add_into(grads.conv2_kernels, conv2.params[0]);
  add_into(grads.conv2_bias, conv2.params[1]);

  LayerGrads conv1 =
      conv1d_backward(t.embedded, p.conv1_kernels, t.conv1, Activation::relu, conv2.input);
  add_into(grads.conv1_kernels, conv1.params[0]);
  add_into(grads.conv1_bias, conv1.params[1]);

  // The padding row stays at zero.
  embedding_accumulate(example.post.ids, conv1.input, grads.embedding, kPadId);
  return loss;
}

}  // namespace

BatchGradient compute_gradient(const ModelParams& params, const ModelConfig& config,
                               std::span<const LabeledPost> batch,
                               std::span<const DropoutMask> masks) {
  params.check_shapes(config);
  check_batch(config, batch, masks);
  BatchGradient out{0.0, ModelParams::zeros(config)};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.loss += accumulate_example(params, config, batch[i], masks[i], out.grads);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (Tensor* g : out.grads.tensors()) scale(*g, inv);
  return out;
}

double batch_loss(const ModelParams& params, const ModelConfig& config,
                  std::span<const LabeledPost> batch, std::span<const DropoutMask> masks) {
  params.check_shapes(config);
  check_batch(config, batch, masks);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Trunk t = run_trunk(params, config, batch[i].post);
    const Tensor dropped = dropout_apply(t.flat, masks[i], DropoutMode::train);
    const Tensor probs =
        dense_forward(dropped, params.dense_weights, params.dense_bias, Activation::softmax);
    total += cce_loss(probs, target_tensor(batch[i].label));
  }
  return total / static_cast<double>(batch.size());
}

// --- training --------------------------------------------------------------

TrainResult train(ModelParams params, const ModelConfig& config,
                  std::span<const LabeledPost> dataset, const TrainConfig& tc) {
  params.check_shapes(config);
  if (tc.batch_size == 0) throw ArgumentError("batch_size must be positive");
  if (!(tc.learning_rate >= 0.0)) throw ArgumentError("learning_rate must be non-negative");
  TrainResult result{std::move(params), {}};
  if (tc.epochs == 0) return result;
  if (dataset.empty()) throw ArgumentError("cannot train on an empty dataset");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!is_distribution(dataset[i].label, 1e-6)) {
      throw ArgumentError("label of example " + std::to_string(i) +
                          " is not a distribution: " + format_distribution(dataset[i].label));
    }
  }

  Rng order_rng(derive_seed(tc.seed, 1));
  Rng dropout_rng(derive_seed(tc.seed, 2));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<LabeledPost> batch;
  std::vector<DropoutMask> masks;
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    if (tc.shuffle) shuffle(order, order_rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      batch.clear();
      masks.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(dataset[order[i]]);
        masks.push_back(DropoutMask::draw(config.flatten_dim(), config.dropout_rate, dropout_rng));
      }
      BatchGradient g = compute_gradient(result.params, config, batch, masks);
      if (!std::isfinite(g.loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(batch_index + 1));
      }
      epoch_loss += g.loss * static_cast<double>(end - start);
      try {
        result.params = sgd_step(result.params, g.grads, tc.learning_rate);
      } catch (const TrainingError& e) {
        throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch + 1) +
                            ", batch " + std::to_string(batch_index + 1));
      }
    }
    result.history.push_back(epoch_loss / static_cast<double>(dataset.size()));
  }
  return result;
}

// --- Monte Carlo dropout ---------------------------------------------------

PredictiveDistribution summarize_passes(std::span<const LabelDistribution> passes) {
  if (passes.empty()) throw ArgumentError("need at least one pass to summarize");
  PredictiveDistribution out;
  LabelDistribution m2{};
  // Welford's update: identical passes leave the mean bit-identical to them.
  for (const auto& p : passes) {
    ++out.passes;
    const double n = static_cast<double>(out.passes);
    for (std::size_t k = 0; k < kClassCount; ++k) {
      const double delta = p[k] - out.mean[k];
      out.mean[k] += delta / n;
      m2[k] += delta * (p[k] - out.mean[k]);
    }
  }
  for (std::size_t k = 0; k < kClassCount; ++k) {
    out.variance[k] = std::max(0.0, m2[k] / static_cast<double>(out.passes));
  }
  return out;
}

std::vector<LabelDistribution> mc_passes(const ModelParams& params, const ModelConfig& config,
                                         const EncodedPost& post, std::size_t passes, Rng& rng) {
  if (passes == 0) throw ArgumentError("mc_predict needs T >= 1 passes");
  Trunk t = run_trunk(params, config, post);
  const std::uint64_t base = rng.next_u64();
  std::vector<LabelDistribution> out;
  out.reserve(passes);
  for (std::size_t i = 0; i < passes; ++i) {
    Rng pass_rng(derive_seed(base, i));
    out.push_back(masked_head(
        params, t.flat, DropoutMask::draw(config.flatten_dim(), config.dropout_rate, pass_rng)));
  }
  return out;
}

PredictiveDistribution mc_predict(const ModelParams& params, const ModelConfig& config,
                                  const EncodedPost& post, std::size_t passes, Rng& rng) {
  return summarize_passes(mc_passes(params, config, post, passes, rng));
}

// --- persistence -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'B', 'L', 'S', 'C', 'K', 'P', 'T'};

class ByteWriter {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::string& bytes() const { return bytes_; }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  std::string bytes_;
};

class ByteReader {
 public:
  ByteReader(std::string bytes, std::string source)
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string raw(std::size_t n) {
    need(n);
    std::string out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw PersistenceError("checkpoint " + source_ + " is truncated at byte " +
                             std::to_string(pos_));
    }
  }
  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const ModelParams& params, const ModelConfig& config,
                     const std::filesystem::path& path) {
  params.check_shapes(config);
  ByteWriter w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  for (std::size_t v : {config.vocab_size, config.emb_dim, config.conv1_filters, config.conv1_width,
                        config.conv2_filters, config.conv2_width, config.pool_width,
                        config.max_len, config.class_count}) {
    w.u64(v);
  }
  w.f64(config.dropout_rate);
  for (const Tensor* t : params.tensors()) {
    w.u32(static_cast<std::uint32_t>(t->rank()));
    for (std::size_t extent : t->shape()) w.u64(extent);
    for (double v : t->data()) w.f64(v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot open " + path.string() + " for writing");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw PersistenceError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(std::move(bytes), path.string());

  if (r.raw(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
    throw PersistenceError(path.string() + " is not a dbls checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw PersistenceError("checkpoint " + path.string() + " has format version " +
                           std::to_string(version) + ", this build reads version " +
                           std::to_string(kCheckpointVersion));
  }
  Checkpoint ck;
  ModelConfig& c = ck.config;
  for (std::size_t* field : {&c.vocab_size, &c.emb_dim, &c.conv1_filters, &c.conv1_width,
                             &c.conv2_filters, &c.conv2_width, &c.pool_width, &c.max_len,
                             &c.class_count}) {
    *field = static_cast<std::size_t>(r.u64());
  }
  c.dropout_rate = r.f64();
  try {
    c.validate();
  } catch (const ConfigurationError& e) {
    throw PersistenceError("checkpoint " + path.string() + " carries an invalid config: " +
                           e.what());
  }

  const auto expected = parameter_shapes(c);
  auto slots = ck.params.tensors();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::uint32_t rank = r.u32();
    Shape shape;
    for (std::uint32_t a = 0; a < rank && a < 8; ++a) shape.push_back(static_cast<std::size_t>(r.u64()));
    if (shape != expected[i]) {
      throw PersistenceError("checkpoint " + path.string() + ": tensor '" +
                             std::string(ModelParams::kNames[i]) + "' has shape " +
                             shape_string(shape) + ", expected " + shape_string(expected[i]));
    }
    std::vector<double> data(element_count(shape));
    for (double& v : data) v = r.f64();
    *slots[i] = Tensor(std::move(shape), std::move(data));
  }
  if (!r.at_end()) throw PersistenceError("checkpoint " + path.string() + " has trailing bytes");
  return ck;
}

}  // namespace dbls
