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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dbls/corpus.hpp"
#include "dbls/metrics.hpp"
#include "dbls/model.hpp"
#include "dbls/smoothing.hpp"
#include "dbls/textpipe.hpp"

namespace dbls {

inline constexpr int kConfigSchemaVersion = 1;

/// One experiment: a corpus (file or generated), the model and training
/// setup, the labelling conditions to compare and the seeds to repeat them
/// over. model.vocab_size is filled in from the data.
struct ExperimentConfig {
  std::filesystem::path corpus_path;
  std::optional<SynthConfig> synthetic;
  ModelConfig model;
  TrainConfig train;
  std::vector<SmoothingConfig> conditions;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "results";
  double test_fraction = 0.2;
  std::size_t max_vocab = 20000;
  bool save_checkpoints = true;

  /// hard, uniform(0.1), uniform(0.05), bayesian(0.1, T = 100).
  static std::vector<SmoothingConfig> default_conditions();

  void validate() const;
};

/// Parses the JSON schema documented in the README. Relative corpus paths
/// resolve against `base_dir`. Unknown keys raise ConfigurationError.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& config);

SynthConfig parse_synth_config(std::string_view json_text);

/// Records for the configured corpus. Generated records keep their
/// annotation metadata in `synthetic`.
struct CorpusData {
  std::vector<PostRecord> records;
  std::vector<SynthRecord> synthetic;
};

CorpusData load_experiment_corpus(const ExperimentConfig& config);

/// A corpus split, tokenized and encoded for one seed.
struct PreparedSplit {
  Vocabulary vocab;
  ModelConfig model;  // vocab_size set
  std::vector<HardExample> train;
  std::vector<HardExample> test;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  /// Generator ground truth for train examples; empty for file corpora.
  std::vector<LabelDistribution> train_truth;
  std::vector<std::string> warnings;
};

PreparedSplit prepare_split(const CorpusData& corpus, const ExperimentConfig& config,
                            std::uint64_t seed);

struct ResultRow {
  std::string condition;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  MetricsReport metrics;
  /// Mean KL(true_distribution || training label); synthetic corpora only.
  std::optional<double> label_kl;
};

struct ConditionSummary {
  std::string condition;
  std::size_t runs = 0;
  double accuracy_mean = 0, accuracy_std = 0;
  double wba_mean = 0, wba_std = 0;
  double macro_precision_mean = 0, macro_precision_std = 0;
  double macro_recall_mean = 0, macro_recall_std = 0;
  double micro_precision_mean = 0, micro_precision_std = 0;
  double label_kl_mean = 0;
  bool has_label_kl = false;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // ordered by condition (config order), then seed
  std::vector<ConditionSummary> summary;
};

/// Runs every (condition, seed) cell and writes results.csv, summary.csv,
/// label_kl.csv (synthetic corpora), per-cell checkpoints and label CSVs into
/// config.output_dir. A failing cell yields a row with ok = false.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<ConditionSummary> summarize(std::span<const ResultRow> rows);

/// Header of results.csv.
std::string results_csv_header();
std::string results_csv_row(const ResultRow& row);

/// example_id,p_SU,p_IN,p_ID,p_SB,p_AT with six decimals.
void write_label_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                     std::span<const LabelDistribution> labels);

struct LabelCsvRow {
  std::string example_id;
  LabelDistribution probs{};
};
std::vector<LabelCsvRow> read_label_csv(const std::filesystem::path& path);

// --- single-purpose entry points used by the CLI --------------------------

struct TrainedModel {
  ModelParams params;
  ModelConfig config;
  Vocabulary vocab;
  std::vector<double> history;
  MetricsReport test_metrics;
};

/// Trains one condition on the seed's train split, evaluates on its test
/// split and writes checkpoint.bin and vocab.txt into `out_dir`.
TrainedModel train_condition(const ExperimentConfig& config, const SmoothingConfig& condition,
                             std::uint64_t seed, const std::filesystem::path& out_dir);

/// Bayesian soft labels for every record of the corpus (no hold-out).
struct SmoothedCorpus {
  std::vector<std::string> ids;
  std::vector<LabelDistribution> labels;
  std::vector<PredictiveDistribution> predictive;
};

SmoothedCorpus smooth_corpus(const ExperimentConfig& config, const SmoothingConfig& condition,
                             std::uint64_t seed);

/// Metrics of a saved model on every record of a corpus file.
MetricsReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                  const std::filesystem::path& vocab,
                                  const std::filesystem::path& corpus);

std::string to_json(const MetricsReport& report);

}  // namespace dbls
