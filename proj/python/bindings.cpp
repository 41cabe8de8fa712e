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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <string>
#include <vector>

#include "dbls/corpus.hpp"
#include "dbls/error.hpp"
#include "dbls/harness.hpp"
#include "dbls/labels.hpp"
#include "dbls/metrics.hpp"
#include "dbls/smoothing.hpp"
#include "dbls/textpipe.hpp"

namespace py = pybind11;
using namespace dbls;

namespace {

LabelDistribution to_label(const std::vector<double>& v) {
  if (v.size() != kClassCount) {
    throw ArgumentError("expected " + std::to_string(kClassCount) + " class probabilities, got " +
                        std::to_string(v.size()));
  }
  LabelDistribution out{};
  for (std::size_t k = 0; k < kClassCount; ++k) out[k] = v[k];
  return out;
}

std::vector<double> to_list(const LabelDistribution& d) { return {d.begin(), d.end()}; }

py::dict metrics_dict(const MetricsReport& r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["weighted_balanced_accuracy"] = r.weighted_balanced_accuracy;
  d["macro_precision"] = r.macro_precision;
  d["macro_recall"] = r.macro_recall;
  d["micro_precision"] = r.micro_precision;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  std::vector<std::vector<std::size_t>> grid(r.matrix.classes());
  for (std::size_t t = 0; t < grid.size(); ++t) {
    for (std::size_t p = 0; p < grid.size(); ++p) grid[t].push_back(r.matrix.count(t, p));
  }
  d["confusion"] = grid;
  return d;
}

py::dict run(const std::string& config_json, const std::string& base_dir) {
  const ExperimentConfig cfg = parse_experiment_config(config_json, base_dir);
  ExperimentResult res;
  {
    py::gil_scoped_release release;
    res = run_experiment(cfg);
  }
  py::list rows;
  for (const auto& r : res.rows) {
    py::dict row;
    row["condition"] = r.condition;
    row["seed"] = r.seed;
    row["ok"] = r.ok;
    row["error"] = r.error;
    row["metrics"] = r.ok ? py::object(metrics_dict(r.metrics)) : py::object(py::none());
    row["label_kl"] = r.label_kl ? py::object(py::float_(*r.label_kl)) : py::object(py::none());
    rows.append(row);
  }
  py::list summary;
  for (const auto& s : res.summary) {
    py::dict d;
    d["condition"] = s.condition;
    d["runs"] = s.runs;
    d["accuracy_mean"] = s.accuracy_mean;
    d["accuracy_std"] = s.accuracy_std;
    d["weighted_balanced_accuracy_mean"] = s.wba_mean;
    d["macro_precision_mean"] = s.macro_precision_mean;
    d["macro_recall_mean"] = s.macro_recall_mean;
    d["micro_precision_mean"] = s.micro_precision_mean;
    d["label_kl_mean"] = s.has_label_kl ? py::object(py::float_(s.label_kl_mean)) : py::object(py::none());
    summary.append(d);
  }
  py::dict out;
  out["rows"] = rows;
  out["summary"] = summary;
  out["output_dir"] = cfg.output_dir.string();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Label smoothing experiments for five-class risk text classification";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ArgumentError> argument(m, "ArgumentError", base.ptr());
  static py::exception<ConfigurationError> configuration(m, "ConfigurationError", base.ptr());
  static py::exception<IngestionError> ingestion(m, "IngestionError", base.ptr());
  static py::exception<PersistenceError> persistence(m, "PersistenceError", base.ptr());
  static py::exception<TrainingError> training(m, "TrainingError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ArgumentError& e) {
      PyErr_SetString(argument.ptr(), e.what());
    } catch (const ConfigurationError& e) {
      PyErr_SetString(configuration.ptr(), e.what());
    } catch (const IngestionError& e) {
      PyErr_SetString(ingestion.ptr(), e.what());
    } catch (const PersistenceError& e) {
      PyErr_SetString(persistence.ptr(), e.what());
    } catch (const TrainingError& e) {
      PyErr_SetString(training.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(base.ptr(), (e.kind() + ": " + e.what()).c_str());
    }
  });

  m.attr("CLASS_CODES") = std::vector<std::string>{"SU", "IN", "ID", "SB", "AT"};

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("one_hot", [](std::size_t k) { return to_list(one_hot(k)); }, py::arg("class_index"));
  m.def(
      "uniform_smooth",
      [](const std::vector<double>& label, double alpha) {
        return to_list(uniform_smooth(to_label(label), alpha));
      },
      py::arg("label"), py::arg("alpha"));
  m.def(
      "blend_label",
      [](std::size_t hard_class, const std::vector<double>& mean, double alpha, bool pure) {
        return to_list(blend_label(hard_class, to_label(mean), alpha, pure));
      },
      py::arg("hard_class"), py::arg("predictive_mean"), py::arg("alpha"), py::arg("pure") = false);

  m.def(
      "metrics",
      [](const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted) {
        return metrics_dict(report(truth, predicted));
      },
      py::arg("truth"), py::arg("predicted"));

  m.def(
      "calibrate_vote_accuracy",
      [](const std::vector<double>& prior, double agreement) {
        return calibrate_vote_accuracy(to_label(prior), agreement);
      },
      py::arg("prior"), py::arg("agreement"));

  m.def(
      "generate_synthetic",
      [](const std::string& synth_json) {
        py::list out;
        for (const auto& r : generate_synthetic(parse_synth_config(synth_json))) {
          py::dict d;
          d["user_id"] = r.record.user_id;
          d["text"] = r.record.text;
          d["label"] = r.record.label;
          d["true_class"] = r.true_class;
          d["true_distribution"] = to_list(r.true_distribution);
          d["annotator_votes"] = r.votes;
          out.append(d);
        }
        return out;
      },
      py::arg("synthetic_json") = "{}");

  m.def(
      "normalize_config",
      [](const std::string& json_text, const std::string& base_dir) {
        return to_json(parse_experiment_config(json_text, base_dir));
      },
      py::arg("config_json"), py::arg("base_dir") = "");

  m.def("run_experiment", &run, py::arg("config_json"), py::arg("base_dir") = "");

  m.def(
      "train",
      [](const std::string& config_json, const std::string& condition, std::uint64_t seed,
         const std::string& out_dir) {
        const ExperimentConfig cfg = parse_experiment_config(config_json);
        const TrainedModel t = train_condition(cfg, parse_condition(condition), seed, out_dir);
        py::dict d = metrics_dict(t.test_metrics);
        d["history"] = t.history;
        return d;
      },
      py::arg("config_json"), py::arg("condition"), py::arg("seed"), py::arg("out_dir"));

  m.def(
      "smooth",
      [](const std::string& config_json, const std::string& condition, std::uint64_t seed) {
        const ExperimentConfig cfg = parse_experiment_config(config_json);
        const SmoothedCorpus s = smooth_corpus(cfg, parse_condition(condition), seed);
        std::vector<std::vector<double>> labels;
        for (const auto& l : s.labels) labels.push_back(to_list(l));
        py::dict d;
        d["ids"] = s.ids;
        d["labels"] = labels;
        return d;
      },
      py::arg("config_json"), py::arg("condition") = "bayesian_0.1", py::arg("seed") = 1);

  m.def(
      "evaluate",
      [](const std::string& checkpoint, const std::string& vocab, const std::string& corpus) {
        return metrics_dict(evaluate_checkpoint(checkpoint, vocab, corpus));
      },
      py::arg("checkpoint"), py::arg("vocab"), py::arg("corpus"));
}
