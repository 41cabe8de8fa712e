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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dbls/error.hpp"
#include "dbls/harness.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string condition;
  std::string checkpoint;
  std::string vocab;
  std::string corpus;
};

// Exit codes: 1 library error, 2 usage, 3 anything else.
int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dbls::ConfigurationError("cannot read config " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

dbls::ExperimentConfig experiment_config(const Options& o) {
  dbls::ExperimentConfig cfg = dbls::load_experiment_config(o.config);
  if (o.seed) cfg.seeds = {*o.seed};
  return cfg;
}

dbls::SmoothingConfig pick_condition(const dbls::ExperimentConfig& cfg, const Options& o,
                                     bool want_bayesian) {
  std::size_t passes = 100;
  for (const auto& c : cfg.conditions) {
    if (c.mode == dbls::SmoothingMode::bayesian) passes = c.passes;
  }
  if (!o.condition.empty()) return dbls::parse_condition(o.condition, passes);
  for (const auto& c : cfg.conditions) {
    if (!want_bayesian || c.mode == dbls::SmoothingMode::bayesian) return c;
  }
  return dbls::SmoothingConfig::bayesian(0.1, passes);
}

int cmd_generate(const Options& o) {
  dbls::SynthConfig synth = dbls::parse_synth_config(read_file(o.config));
  if (o.seed) synth.seed = *o.seed;
  const auto records = dbls::generate_synthetic(synth);
  const fs::path out = o.out.empty() ? fs::path("corpus.jsonl") : fs::path(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  dbls::save_synthetic_corpus(records, out);
  std::cout << json{{"records", records.size()},
                    {"agreement", dbls::pairwise_agreement(records)},
                    {"out", out.string()}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  const dbls::ExperimentConfig cfg = experiment_config(o);
  const dbls::SmoothingConfig condition = pick_condition(cfg, o, false);
  const fs::path out = o.out.empty() ? fs::path("model") : fs::path(o.out);
  const auto trained = dbls::train_condition(cfg, condition, cfg.seeds.front(), out);
  json j = json::parse(dbls::to_json(trained.test_metrics));
  j["condition"] = condition.name();
  j["seed"] = cfg.seeds.front();
  j["final_loss"] = trained.history.empty() ? 0.0 : trained.history.back();
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_smooth(const Options& o) {
  const dbls::ExperimentConfig cfg = experiment_config(o);
  const dbls::SmoothingConfig condition = pick_condition(cfg, o, true);
  const auto smoothed = dbls::smooth_corpus(cfg, condition, cfg.seeds.front());
  const fs::path out = o.out.empty() ? fs::path("labels.csv") : fs::path(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  dbls::write_label_csv(out, smoothed.ids, smoothed.labels);
  std::cout << json{{"condition", condition.name()},
                    {"records", smoothed.ids.size()},
                    {"out", out.string()}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_evaluate(const Options& o) {
  fs::path corpus = o.corpus;
  if (corpus.empty()) {
    if (o.config.empty()) throw dbls::ArgumentError("evaluate needs --corpus or --config");
    const auto cfg = dbls::load_experiment_config(o.config);
    if (cfg.corpus_path.empty()) {
      throw dbls::ArgumentError("config has no corpus file; pass --corpus");
    }
    corpus = cfg.corpus_path;
  }
  const auto report = dbls::evaluate_checkpoint(o.checkpoint, o.vocab, corpus);
  const std::string text = dbls::to_json(report);
  if (!o.out.empty()) {
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw dbls::PersistenceError("cannot write " + o.out);
    out << text << '\n';
  }
  std::cout << text << '\n';
  return 0;
}

int cmd_experiment(const Options& o) {
  dbls::ExperimentConfig cfg = experiment_config(o);
  if (!o.out.empty()) cfg.output_dir = o.out;
  const auto result = dbls::run_experiment(cfg);
  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += !row.ok;
  for (const auto& s : result.summary) {
    std::cout << s.condition << " accuracy " << s.accuracy_mean << " +- " << s.accuracy_std
              << " wba " << s.wba_mean << '\n';
  }
  std::cout << json{{"rows", result.rows.size()},
                    {"failed", failed},
                    {"out", cfg.output_dir.string()}}
                   .dump()
            << '\n';
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label smoothing experiments for five-class risk text classification", "dbls"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("--seed", o.seed, "override the seed");
    sub->add_option("--out", o.out, "output path");
  };

  auto* generate = app.add_subcommand("generate", "write a synthetic annotated corpus");
  common(generate, true);
  auto* train = app.add_subcommand("train", "train one labelling condition and save it");
  common(train, true);
  train->add_option("--condition", o.condition, "hard, uniform_<a>, bayesian_<a>[_pure]");
  auto* smooth = app.add_subcommand("smooth", "write Bayesian soft labels for a corpus");
  common(smooth, true);
  smooth->add_option("--condition", o.condition, "bayesian_<a>[_pure]");
  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a corpus");
  common(evaluate, false);
  evaluate->add_option("--checkpoint", o.checkpoint)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--vocab", o.vocab)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--corpus", o.corpus)->check(CLI::ExistingFile);
  auto* experiment = app.add_subcommand("experiment", "run every condition over every seed");
  common(experiment, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    return fail("usage", e.what(), 2);
  }

  try {
    if (generate->parsed()) return cmd_generate(o);
    if (train->parsed()) return cmd_train(o);
    if (smooth->parsed()) return cmd_smooth(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    return cmd_experiment(o);
  } catch (const dbls::Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 3);
  }
}
