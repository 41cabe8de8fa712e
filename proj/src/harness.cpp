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

#include "dbls/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "dbls/error.hpp"
#include "json.hpp"

namespace dbls {

using nlohmann::json;

// --- configuration ---------------------------------------------------------

std::vector<SmoothingConfig> ExperimentConfig::default_conditions() {
  return {SmoothingConfig::hard(), SmoothingConfig::uniform(0.1), SmoothingConfig::uniform(0.05),
          SmoothingConfig::bayesian(0.1, 100)};
}

void ExperimentConfig::validate() const {
  if (corpus_path.empty() == !synthetic.has_value()) {
    throw ConfigurationError("experiment needs exactly one of 'corpus' or 'synthetic'");
  }
  if (conditions.empty()) throw ConfigurationError("experiment needs at least one condition");
  if (seeds.empty()) throw ConfigurationError("experiment needs at least one seed");
  std::set<std::string> names;
  for (const auto& c : conditions) {
    c.validate();
    if (!names.insert(c.name()).second) {
      throw ConfigurationError("condition '" + c.name() + "' is listed twice");
    }
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigurationError("test_fraction must lie in (0, 1)");
  }
  if (max_vocab < 3) throw ConfigurationError("max_vocab must be at least 3");
  if (train.batch_size == 0) throw ConfigurationError("train.batch_size must be positive");
  if (synthetic) synthetic->validate();
}

namespace {

// Reads fields from a JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigurationError(where_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigurationError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigurationError(where_ + ": unknown key '" + it.key() + "'");
      }
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

SynthConfig synth_from_json(const json& j) {
  SynthConfig s;
  Fields f(j, "synthetic");
  std::vector<double> prior(s.class_prior.begin(), s.class_prior.end());
  f.get("users", s.users);
  f.get("class_prior", prior);
  f.get("agreement", s.agreement);
  f.get("annotators", s.annotators);
  f.get("marker_strength", s.marker_strength);
  f.get("seed", s.seed);
  f.get("min_tokens", s.min_tokens);
  f.get("max_tokens", s.max_tokens);
  f.get("markers_per_post", s.markers_per_post);
  f.get("markers_per_class", s.markers_per_class);
  f.get("filler_tokens", s.filler_tokens);
  f.finish();
  if (prior.size() != kClassCount) {
    throw ConfigurationError("synthetic.class_prior needs 5 entries");
  }
  std::copy(prior.begin(), prior.end(), s.class_prior.begin());
  return s;
}

json synth_to_json(const SynthConfig& s) {
  return json{{"users", s.users},
              {"class_prior", std::vector<double>(s.class_prior.begin(), s.class_prior.end())},
              {"agreement", s.agreement},
              {"annotators", s.annotators},
              {"marker_strength", s.marker_strength},
              {"seed", s.seed},
              {"min_tokens", s.min_tokens},
              {"max_tokens", s.max_tokens},
              {"markers_per_post", s.markers_per_post},
              {"markers_per_class", s.markers_per_class},
              {"filler_tokens", s.filler_tokens}};
}

SmoothingConfig condition_from_json(const json& j, std::size_t index) {
  Fields f(j, "conditions[" + std::to_string(index) + "]");
  std::string mode = "hard";
  SmoothingConfig c;
  f.get("mode", mode);
  c.mode = parse_smoothing_mode(mode);
  if (c.mode == SmoothingMode::bayesian) c.alpha = 0.1;
  f.get("alpha", c.alpha);
  f.get("passes", c.passes);
  f.get("pure", c.pure);
  f.get("rounds", c.rounds);
  f.finish();
  return c;
}

json condition_to_json(const SmoothingConfig& c) {
  json j{{"mode", std::string(to_string(c.mode))}};
  if (c.mode != SmoothingMode::hard) j["alpha"] = c.alpha;
  if (c.mode == SmoothingMode::bayesian) {
    j["passes"] = c.passes;
    j["pure"] = c.pure;
    j["rounds"] = c.rounds;
  }
  return j;
}

json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(what + " is not valid JSON: " + e.what());
  }
}

}  // namespace

SynthConfig parse_synth_config(std::string_view json_text) {
  json j = parse_json_text(json_text, "synthetic config");
  // Accept either a bare synthetic block or a full experiment config.
  if (j.is_object() && j.contains("synthetic")) return synth_from_json(j["synthetic"]);
  SynthConfig s = synth_from_json(j);
  s.validate();
  return s;
}

ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir) {
  json j = parse_json_text(json_text, "experiment config");
  ExperimentConfig cfg;
  Fields top(j, "config");

  int version = kConfigSchemaVersion;
  top.get("schema_version", version);
  if (version != kConfigSchemaVersion) {
    throw ConfigurationError("config schema_version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kConfigSchemaVersion) + ")");
  }

  std::string corpus;
  top.get("corpus", corpus);
  if (!corpus.empty()) {
    std::filesystem::path p(corpus);
    cfg.corpus_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (const json* synth = top.child("synthetic")) cfg.synthetic = synth_from_json(*synth);

  if (const json* model = top.child("model")) {
    Fields f(*model, "model");
    ModelConfig& m = cfg.model;
    f.get("emb_dim", m.emb_dim);
    f.get("conv1_filters", m.conv1_filters);
    f.get("conv1_width", m.conv1_width);
    f.get("conv2_filters", m.conv2_filters);
    f.get("conv2_width", m.conv2_width);
    f.get("pool_width", m.pool_width);
    f.get("dropout_rate", m.dropout_rate);
    f.get("max_len", m.max_len);
    f.finish();
  }
  if (const json* train = top.child("train")) {
    Fields f(*train, "train");
    TrainConfig& t = cfg.train;
    f.get("learning_rate", t.learning_rate);
    f.get("batch_size", t.batch_size);
    f.get("epochs", t.epochs);
    f.get("shuffle", t.shuffle);
    f.finish();
  }
  if (const json* conds = top.child("conditions")) {
    if (!conds->is_array()) throw ConfigurationError("conditions must be an array");
    for (std::size_t i = 0; i < conds->size(); ++i) {
      cfg.conditions.push_back(condition_from_json((*conds)[i], i));
    }
  } else {
    cfg.conditions = ExperimentConfig::default_conditions();
  }
  top.get("seeds", cfg.seeds);
  std::string out_dir = cfg.output_dir.string();
  top.get("output_dir", out_dir);
  cfg.output_dir = out_dir;
  top.get("test_fraction", cfg.test_fraction);
  top.get("max_vocab", cfg.max_vocab);
  top.get("save_checkpoints", cfg.save_checkpoints);
  top.finish();

  // vocab_size comes from the data; a placeholder keeps validate() meaningful.
  cfg.model.vocab_size = std::max<std::size_t>(cfg.model.vocab_size, 3);
  try {
    cfg.model.validate();
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path.parent_path());
}

std::string to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  if (!cfg.corpus_path.empty()) j["corpus"] = cfg.corpus_path.string();
  if (cfg.synthetic) j["synthetic"] = synth_to_json(*cfg.synthetic);
  const ModelConfig& m = cfg.model;
  j["model"] = json{{"emb_dim", m.emb_dim},           {"conv1_filters", m.conv1_filters},
                    {"conv1_width", m.conv1_width},   {"conv2_filters", m.conv2_filters},
                    {"conv2_width", m.conv2_width},   {"pool_width", m.pool_width},
                    {"dropout_rate", m.dropout_rate}, {"max_len", m.max_len}};
  j["train"] = json{{"learning_rate", cfg.train.learning_rate},
                    {"batch_size", cfg.train.batch_size},
                    {"epochs", cfg.train.epochs},
                    {"shuffle", cfg.train.shuffle}};
  json conds = json::array();
  for (const auto& c : cfg.conditions) conds.push_back(condition_to_json(c));
  j["conditions"] = std::move(conds);
  j["seeds"] = cfg.seeds;
  j["output_dir"] = cfg.output_dir.string();
  j["test_fraction"] = cfg.test_fraction;
  j["max_vocab"] = cfg.max_vocab;
  j["save_checkpoints"] = cfg.save_checkpoints;
  return j.dump(2);
}

// --- data ------------------------------------------------------------------

CorpusData load_experiment_corpus(const ExperimentConfig& config) {
  CorpusData data;
  if (config.synthetic) {
    data.synthetic = generate_synthetic(*config.synthetic);
    data.records = records_of(data.synthetic);
  } else {
    data.records = load_corpus(config.corpus_path);
  }
  return data;
}

PreparedSplit prepare_split(const CorpusData& corpus, const ExperimentConfig& config,
                            std::uint64_t seed) {
  PreparedSplit out;
  Split s = split(corpus.records, config.test_fraction, derive_seed(seed, 11));
  out.warnings = std::move(s.warnings);

  std::vector<std::vector<std::string>> train_tokens;
  train_tokens.reserve(s.train.size());
  for (std::size_t i : s.train) train_tokens.push_back(tokenize(corpus.records[i].text));
  // The vocabulary only sees training text.
  out.vocab = build_vocab(train_tokens, config.max_vocab);
  out.model = config.model;
  out.model.vocab_size = out.vocab.size();

  for (std::size_t n = 0; n < s.train.size(); ++n) {
    const auto& r = corpus.records[s.train[n]];
    out.train.push_back({encode(train_tokens[n], out.vocab, out.model.max_len), r.label});
    out.train_ids.push_back(r.user_id);
    if (!corpus.synthetic.empty()) {
      out.train_truth.push_back(corpus.synthetic[s.train[n]].true_distribution);
    }
  }
  for (std::size_t i : s.test) {
    const auto& r = corpus.records[i];
    out.test.push_back({encode(tokenize(r.text), out.vocab, out.model.max_len), r.label});
    out.test_ids.push_back(r.user_id);
  }
  return out;
}

// --- running ---------------------------------------------------------------

namespace {

constexpr std::uint64_t kInitStream = 21;
constexpr std::uint64_t kTrainStream = 22;
constexpr std::uint64_t kLabelStream = 1000;

ModelParams fresh_params(const ModelConfig& config, std::uint64_t seed) {
  Rng init(derive_seed(seed, kInitStream));
  return ModelParams::initialize(config, init);
}

TrainConfig final_train_config(const TrainConfig& base, std::uint64_t seed) {
  TrainConfig t = base;
  t.seed = derive_seed(seed, kTrainStream);
  return t;
}

MetricsReport evaluate(const ModelParams& params, const ModelConfig& config,
                       std::span<const HardExample> examples) {
  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
  for (const auto& e : examples) {
    truth.push_back(e.label);
    predicted.push_back(predict_class(params, config, e.post));
  }
  return report(truth, predicted);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot write " + path.string());
  out << text;
  if (!out) throw PersistenceError("failed writing " + path.string());
}

std::string file_safe(std::string name) {
  for (char& c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  }
  return name;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string results_csv_header() { return "condition,seed," + metrics_csv_header(); }

std::string results_csv_row(const ResultRow& row) {
  std::string out = row.condition + "," + std::to_string(row.seed) + ",";
  if (!row.ok) return out + "nan,nan,nan,nan,nan";
  return out + metrics_csv_row(row.metrics);
}

std::vector<ConditionSummary> summarize(std::span<const ResultRow> rows) {
  std::vector<ConditionSummary> out;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.condition) == order.end()) order.push_back(r.condition);
  }
  for (const auto& name : order) {
    std::vector<double> acc, wba, mp, mr, mip, kl;
    for (const auto& r : rows) {
      if (r.condition != name || !r.ok) continue;
      acc.push_back(r.metrics.accuracy);
      wba.push_back(r.metrics.weighted_balanced_accuracy);
      mp.push_back(r.metrics.macro_precision);
      mr.push_back(r.metrics.macro_recall);
      mip.push_back(r.metrics.micro_precision);
      if (r.label_kl) kl.push_back(*r.label_kl);
    }
    ConditionSummary s;
    s.condition = name;
    s.runs = acc.size();
    s.accuracy_mean = mean_of(acc);
    s.accuracy_std = stddev_of(acc);
    s.wba_mean = mean_of(wba);
    s.wba_std = stddev_of(wba);
    s.macro_precision_mean = mean_of(mp);
    s.macro_precision_std = stddev_of(mp);
    s.macro_recall_mean = mean_of(mr);
    s.macro_recall_std = stddev_of(mr);
    s.micro_precision_mean = mean_of(mip);
    s.micro_precision_std = stddev_of(mip);
    s.has_label_kl = !kl.empty();
    s.label_kl_mean = mean_of(kl);
    out.push_back(s);
  }
  return out;
}

void write_label_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                     std::span<const LabelDistribution> labels) {
  if (ids.size() != labels.size()) throw ArgumentError("label CSV: ids and labels differ in length");
  std::string text = "example_id";
  for (auto code : kClassCodes) text += ",p_" + std::string(code);
  text += '\n';
  char buf[32];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    text += ids[i];
    for (double p : labels[i]) {
      std::snprintf(buf, sizeof buf, ",%.6f", p);
      text += buf;
    }
    text += '\n';
  }
  write_text(path, text);
}

std::vector<LabelCsvRow> read_label_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot read label CSV " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<LabelCsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    LabelCsvRow row;
    std::getline(ss, row.example_id, ',');
    std::string cell;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      if (!std::getline(ss, cell, ',')) {
        throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": too few columns");
      }
      try {
        row.probs[k] = std::stod(cell);
      } catch (const std::exception&) {
        throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                             cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  write_text(config.output_dir / "config.json", to_json(config) + "\n");

  const CorpusData corpus = load_experiment_corpus(config);
  ExperimentResult result;
  std::vector<std::string> failures;

  // cells[condition][seed]
  std::vector<std::vector<ResultRow>> cells(config.conditions.size());
  std::vector<std::uint64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  for (std::uint64_t seed : seeds) {
    std::optional<PreparedSplit> data;
    std::string split_error;
    try {
      data = prepare_split(corpus, config, seed);
      data->vocab.save(config.output_dir / ("vocab_seed" + std::to_string(seed) + ".txt"));
    } catch (const std::exception& e) {
      split_error = e.what();
    }

    for (std::size_t ci = 0; ci < config.conditions.size(); ++ci) {
      const SmoothingConfig& condition = config.conditions[ci];
      ResultRow row;
      row.condition = condition.name();
      row.seed = seed;
      try {
        if (!data) throw ArgumentError("data preparation failed: " + split_error);
        const std::vector<LabeledPost> labelled = run_smoothing_condition(
            condition, data->train, data->model, config.train, derive_seed(seed, kLabelStream + ci));

        TrainResult trained = train(fresh_params(data->model, seed), data->model, labelled,
                                    final_train_config(config.train, seed));
        row.metrics = evaluate(trained.params, data->model, data->test);

        std::vector<LabelDistribution> labels;
        for (const auto& l : labelled) labels.push_back(l.label);
        if (!data->train_truth.empty()) {
          double kl = 0.0;
          for (std::size_t i = 0; i < labels.size(); ++i) {
            kl += kl_divergence(data->train_truth[i], labels[i]);
          }
          row.label_kl = kl / static_cast<double>(labels.size());
        }

        const std::string stem = file_safe(row.condition) + "_seed" + std::to_string(seed);
        write_label_csv(config.output_dir / ("labels_" + stem + ".csv"), data->train_ids, labels);
        if (config.save_checkpoints) {
          save_checkpoint(trained.params, data->model,
                          config.output_dir / ("checkpoint_" + stem + ".bin"));
        }
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        failures.push_back(row.condition + ",seed " + std::to_string(seed) + ": " + row.error);
      }
      cells[ci].push_back(std::move(row));
    }
  }

  for (auto& per_condition : cells) {
    for (auto& row : per_condition) result.rows.push_back(std::move(row));
  }
  result.summary = summarize(result.rows);

  std::string csv = results_csv_header() + "\n";
  for (const auto& row : result.rows) csv += results_csv_row(row) + "\n";
  write_text(config.output_dir / "results.csv", csv);

  std::string summary =
      "condition,runs,accuracy_mean,accuracy_std,weighted_balanced_accuracy_mean,"
      "weighted_balanced_accuracy_std,macro_precision_mean,macro_precision_std,"
      "macro_recall_mean,macro_recall_std,micro_precision_mean,micro_precision_std\n";
  for (const auto& s : result.summary) {
    summary += s.condition + "," + std::to_string(s.runs);
    for (double v : {s.accuracy_mean, s.accuracy_std, s.wba_mean, s.wba_std,
                     s.macro_precision_mean, s.macro_precision_std, s.macro_recall_mean,
                     s.macro_recall_std, s.micro_precision_mean, s.micro_precision_std}) {
      summary += "," + format_double(v);
    }
    summary += "\n";
  }
  write_text(config.output_dir / "summary.csv", summary);

  if (!corpus.synthetic.empty()) {
    std::string kl = "condition,seed,mean_kl_true_to_label\n";
    for (const auto& row : result.rows) {
      kl += row.condition + "," + std::to_string(row.seed) + "," +
            format_double(row.label_kl.value_or(std::nan(""))) + "\n";
    }
    write_text(config.output_dir / "label_kl.csv", kl);
  }

  std::string failure_text;
  for (const auto& f : failures) failure_text += f + "\n";
  if (!failure_text.empty()) write_text(config.output_dir / "failures.txt", failure_text);
  return result;
}

// --- CLI entry points ------------------------------------------------------

TrainedModel train_condition(const ExperimentConfig& config, const SmoothingConfig& condition,
                             std::uint64_t seed, const std::filesystem::path& out_dir) {
  config.validate();
  const CorpusData corpus = load_experiment_corpus(config);
  PreparedSplit data = prepare_split(corpus, config, seed);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';

  const auto labelled = run_smoothing_condition(condition, data.train, data.model, config.train,
                                                derive_seed(seed, kLabelStream));
  TrainResult trained = train(fresh_params(data.model, seed), data.model, labelled,
                              final_train_config(config.train, seed));
  TrainedModel out{std::move(trained.params), data.model, std::move(data.vocab),
                   std::move(trained.history), {}};
  out.test_metrics = evaluate(out.params, out.config, data.test);

  std::filesystem::create_directories(out_dir);
  save_checkpoint(out.params, out.config, out_dir / "checkpoint.bin");
  out.vocab.save(out_dir / "vocab.txt");
  return out;
}

SmoothedCorpus smooth_corpus(const ExperimentConfig& config, const SmoothingConfig& condition,
                             std::uint64_t seed) {
  config.validate();
  if (condition.mode != SmoothingMode::bayesian) {
    throw ArgumentError("smooth needs a bayesian condition, got '" + condition.name() + "'");
  }
  const CorpusData corpus = load_experiment_corpus(config);
  std::vector<std::vector<std::string>> tokens;
  for (const auto& r : corpus.records) tokens.push_back(tokenize(r.text));
  const Vocabulary vocab = build_vocab(tokens, config.max_vocab);
  ModelConfig model = config.model;
  model.vocab_size = vocab.size();

  std::vector<HardExample> examples;
  SmoothedCorpus out;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    examples.push_back({encode(tokens[i], vocab, model.max_len), corpus.records[i].label});
    out.ids.push_back(corpus.records[i].user_id);
  }
  BayesianSmoothing smoothed =
      bayesian_smooth(examples, model, config.train, condition, derive_seed(seed, kLabelStream));
  out.labels = std::move(smoothed.labels);
  out.predictive = std::move(smoothed.predictive);
  return out;
}

MetricsReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                  const std::filesystem::path& vocab_path,
                                  const std::filesystem::path& corpus_path) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const Vocabulary vocab = Vocabulary::load(vocab_path);
  if (vocab.size() != ck.config.vocab_size) {
    throw ConfigurationError("vocabulary " + vocab_path.string() + " has " +
                             std::to_string(vocab.size()) + " ids but the checkpoint expects " +
                             std::to_string(ck.config.vocab_size));
  }
  std::vector<HardExample> examples;
  for (const auto& r : load_corpus(corpus_path)) {
    examples.push_back({encode(tokenize(r.text), vocab, ck.config.max_len), r.label});
  }
  return evaluate(ck.params, ck.config, examples);
}

std::string to_json(const MetricsReport& r) {
  json j;
  j["accuracy"] = r.accuracy;
  j["weighted_balanced_accuracy"] = r.weighted_balanced_accuracy;
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["micro_precision"] = r.micro_precision;
  json per_class = json::object();
  for (std::size_t k = 0; k < r.precision.size() && k < kClassCount; ++k) {
    per_class[std::string(kClassCodes[k])] =
        json{{"precision", r.precision[k]}, {"recall", r.recall[k]}, {"f1", r.f1[k]}};
  }
  j["per_class"] = std::move(per_class);
  json matrix = json::array();
  for (std::size_t t = 0; t < r.matrix.classes(); ++t) {
    json row = json::array();
    for (std::size_t p = 0; p < r.matrix.classes(); ++p) row.push_back(r.matrix.count(t, p));
    matrix.push_back(std::move(row));
  }
  j["confusion"] = std::move(matrix);
  j["examples"] = r.matrix.total();
  return j.dump();
}

}  // namespace dbls
