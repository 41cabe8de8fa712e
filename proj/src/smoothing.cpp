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

#include "dbls/smoothing.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "dbls/error.hpp"

namespace dbls {

std::string_view to_string(SmoothingMode mode) {
  switch (mode) {
    case SmoothingMode::hard: return "hard";
    case SmoothingMode::uniform: return "uniform";
    case SmoothingMode::bayesian: return "bayesian";
  }
  return "unknown";
}

SmoothingMode parse_smoothing_mode(std::string_view name) {
  if (name == "hard") return SmoothingMode::hard;
  if (name == "uniform") return SmoothingMode::uniform;
  if (name == "bayesian") return SmoothingMode::bayesian;
  throw ArgumentError("unknown smoothing mode '" + std::string(name) + "'");
}

std::string SmoothingConfig::name() const {
  if (mode == SmoothingMode::hard) return "hard";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%g", std::string(to_string(mode)).c_str(), alpha);
  std::string out = buf;
  if (mode == SmoothingMode::bayesian && pure) out += "_pure";
  return out;
}

SmoothingConfig parse_condition(std::string_view name, std::size_t passes) {
  const std::string text(name);
  const auto bad = [&]() -> ArgumentError {
    return ArgumentError("cannot parse condition '" + text +
                         "'; expected hard, uniform_<alpha> or bayesian_<alpha>[_pure]");
  };
  if (text == "hard") return SmoothingConfig::hard();
  const auto sep = text.find('_');
  if (sep == std::string::npos) throw bad();
  SmoothingConfig c;
  c.mode = parse_smoothing_mode(text.substr(0, sep));
  std::string rest = text.substr(sep + 1);
  if (c.mode == SmoothingMode::bayesian && rest.size() > 5 &&
      rest.compare(rest.size() - 5, 5, "_pure") == 0) {
    c.pure = true;
    rest.resize(rest.size() - 5);
  }
  std::size_t used = 0;
  try {
    c.alpha = std::stod(rest, &used);
  } catch (const std::exception&) {
    throw bad();
  }
  if (used != rest.size()) throw bad();
  c.passes = passes;
  c.validate();
  return c;
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ArgumentError("smoothing alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

}  // namespace

void SmoothingConfig::validate() const {
  check_alpha(alpha);
  if (mode == SmoothingMode::bayesian) {
    if (passes == 0) throw ArgumentError("bayesian smoothing needs at least one MC pass");
    if (rounds == 0) throw ArgumentError("bayesian smoothing needs at least one round");
  }
}

LabelDistribution one_hot(std::size_t class_index) {
  if (class_index >= kClassCount) {
    throw ArgumentError("class index " + std::to_string(class_index) + " is outside 0.." +
                        std::to_string(kClassCount - 1));
  }
  LabelDistribution out{};
  out[class_index] = 1.0;
  return out;
}

LabelDistribution uniform_smooth(const LabelDistribution& label, double alpha) {
  check_alpha(alpha);
  std::size_t hot = kClassCount;
  for (std::size_t k = 0; k < kClassCount; ++k) {
    if (label[k] == 1.0 && hot == kClassCount) {
      hot = k;
    } else if (label[k] != 0.0) {
      hot = kClassCount + 1;
      break;
    }
  }
  if (hot >= kClassCount) {
    throw ArgumentError("uniform smoothing needs a one-hot label, got " + format_distribution(label));
  }
  const double off = alpha / static_cast<double>(kClassCount - 1);
  LabelDistribution out;
  out.fill(off);
  out[hot] = 1.0 - alpha;
  return out;
}

LabelDistribution blend_label(std::size_t hard_class, const LabelDistribution& predictive_mean,
                              double alpha, bool pure) {
  check_alpha(alpha);
  if (pure) return predictive_mean;
  const LabelDistribution hot = one_hot(hard_class);
  LabelDistribution out;
  for (std::size_t k = 0; k < kClassCount; ++k) {
    out[k] = (1.0 - alpha) * hot[k] + alpha * predictive_mean[k];
  }
  return out;
}

BayesianSmoothing bayesian_smooth(std::span<const HardExample> examples,
                                  const ModelConfig& model_config, const TrainConfig& train_config,
                                  const SmoothingConfig& smoothing, std::uint64_t seed) {
  smoothing.validate();
  if (examples.empty()) throw ArgumentError("bayesian smoothing needs a non-empty dataset");

  BayesianSmoothing out;
  out.labels.reserve(examples.size());
  for (const auto& e : examples) out.labels.push_back(one_hot(e.label));

  for (std::size_t round = 0; round < smoothing.rounds; ++round) {
    std::vector<LabeledPost> dataset;
    dataset.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
      dataset.push_back({examples[i].post, out.labels[i]});
    }

    Rng init_rng(derive_seed(seed, 100 + round));
    TrainConfig stage_train = train_config;
    stage_train.seed = derive_seed(seed, 200 + round);
    TrainResult trained =
        train(ModelParams::initialize(model_config, init_rng), model_config, dataset, stage_train);
    out.histories.push_back(std::move(trained.history));

    Rng mc_rng(derive_seed(seed, 300 + round));
    out.predictive.clear();
    for (std::size_t i = 0; i < examples.size(); ++i) {
      out.predictive.push_back(
          mc_predict(trained.params, model_config, examples[i].post, smoothing.passes, mc_rng));
      out.labels[i] =
          blend_label(examples[i].label, out.predictive.back().mean, smoothing.alpha, smoothing.pure);
    }
  }
  return out;
}

std::vector<LabelDistribution> bayesian_smooth_labels(std::span<const HardExample> examples,
                                                      const ModelConfig& model_config,
                                                      const TrainConfig& train_config,
                                                      const SmoothingConfig& smoothing,
                                                      std::uint64_t seed) {
  return bayesian_smooth(examples, model_config, train_config, smoothing, seed).labels;
}

std::vector<LabeledPost> run_smoothing_condition(const SmoothingConfig& condition,
                                                 std::span<const HardExample> examples,
                                                 const ModelConfig& model_config,
                                                 const TrainConfig& train_config,
                                                 std::uint64_t seed) {
  condition.validate();
  std::vector<LabeledPost> out;
  out.reserve(examples.size());
  switch (condition.mode) {
    case SmoothingMode::hard:
      for (const auto& e : examples) out.push_back({e.post, one_hot(e.label)});
      break;
    case SmoothingMode::uniform:
      for (const auto& e : examples) {
        out.push_back({e.post, uniform_smooth(one_hot(e.label), condition.alpha)});
      }
      break;
    case SmoothingMode::bayesian: {
      auto labels = bayesian_smooth_labels(examples, model_config, train_config, condition, seed);
      for (std::size_t i = 0; i < examples.size(); ++i) {
        out.push_back({examples[i].post, labels[i]});
      }
      break;
    }
  }
  return out;
}

}  // namespace dbls
