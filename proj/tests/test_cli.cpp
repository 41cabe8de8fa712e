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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "dbls_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Run run(const std::string& args) {
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(DBLS_CLI) + " " + args + " 2>" + err.string();
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream(p) << text;
  return p;
}

std::string last_line(const std::string& text) {
  std::string t = text;
  while (!t.empty() && t.back() == '\n') t.pop_back();
  const auto pos = t.rfind('\n');
  return pos == std::string::npos ? t : t.substr(pos + 1);
}

const char* kSeparable = R"({
  "synthetic": {"users": 200, "agreement": 1.0, "marker_strength": 1.0,
                "min_tokens": 8, "max_tokens": 12, "markers_per_class": 1},
  "model": {"emb_dim": 8, "conv1_filters": 16, "conv2_filters": 16, "max_len": 16},
  "train": {"epochs": 40},
  "conditions": [{"mode": "hard"}, {"mode": "bayesian", "alpha": 0.1, "passes": 5}]
})";

}  // namespace

TEST_CASE("usage on missing or unknown subcommands and flags") {
  for (const char* args : {"", "frobnicate", "generate --bogus 1", "train --config"}) {
    INFO(args);
    const Run r = run(args);
    CHECK(r.code != 0);
    CHECK(r.err.find("Usage:") != std::string::npos);
    const json err = json::parse(last_line(r.err));
    CHECK(err["error"] == "usage");
  }
  const Run help = run("--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("experiment") != std::string::npos);
}

TEST_CASE("library errors exit nonzero with one json line") {
  const auto cfg = write_config("bad.json", R"({"synthetic": {"agreement": 0.1}})");
  const Run r = run("generate --config " + cfg.string() + " --out " +
                    (work_dir() / "never.jsonl").string());
  CHECK(r.code == 1);
  CHECK(r.err.find('\n') == r.err.size() - 1);
  const json err = json::parse(r.err);
  CHECK(err["error"] == "argument");
  CHECK(err["message"].get<std::string>().find("chance") != std::string::npos);

  const auto unknown = write_config("unknown.json", R"({"synthetic": {}, "oops": 1})");
  const Run u = run("experiment --config " + unknown.string());
  CHECK(u.code == 1);
  CHECK(json::parse(u.err)["error"] == "configuration");
}

TEST_CASE("generate writes a synthetic corpus") {
  const auto cfg = write_config("sep.json", kSeparable);
  const fs::path out = work_dir() / "corpus.jsonl";
  const Run r = run("generate --config " + cfg.string() + " --seed 4 --out " + out.string());
  CHECK(r.code == 0);
  const json summary = json::parse(last_line(r.out));
  CHECK(summary["records"] == 200);
  std::ifstream in(out);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const json rec = json::parse(line);
    CHECK(rec.contains("true_distribution"));
    CHECK(rec["annotator_votes"].size() == 4);
    ++lines;
  }
  CHECK(lines == 200);
}

TEST_CASE("experiment writes results.csv with a header") {
  const auto cfg = write_config("sep2.json", kSeparable);
  const fs::path out = work_dir() / "results";
  const Run r = run("experiment --config " + cfg.string() + " --seed 2 --out " + out.string());
  CHECK(r.code == 0);
  std::ifstream in(out / "results.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "condition,seed,accuracy,weighted_balanced_accuracy,macro_precision,macro_recall,"
        "micro_precision");
  std::string row;
  std::getline(in, row);
  CHECK(row.rfind("hard,2,", 0) == 0);
}

TEST_CASE("smooth rows are distributions") {
  const auto cfg = write_config("sep3.json", kSeparable);
  const fs::path out = work_dir() / "labels.csv";
  const Run r = run("smooth --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 0);
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    double sum = 0;
    while (std::getline(ss, cell, ',')) sum += std::stod(cell);
    CHECK(std::abs(sum - 1.0) <= 1e-5);
    ++rows;
  }
  CHECK(rows == 200);
  const Run hard = run("smooth --config " + cfg.string() + " --condition hard");
  CHECK(hard.code == 1);
}

TEST_CASE("train then evaluate a perfect fit") {
  const auto cfg = write_config("sep4.json", kSeparable);
  const fs::path model = work_dir() / "model";
  const Run t = run("train --config " + cfg.string() + " --condition hard --out " + model.string());
  REQUIRE(t.code == 0);
  CHECK(json::parse(last_line(t.out))["accuracy"] == 1.0);

  const fs::path corpus = work_dir() / "eval_corpus.jsonl";
  REQUIRE(run("generate --config " + cfg.string() + " --out " + corpus.string()).code == 0);
  const fs::path metrics = work_dir() / "metrics.json";
  const Run e = run("evaluate --checkpoint " + (model / "checkpoint.bin").string() + " --vocab " +
                    (model / "vocab.txt").string() + " --corpus " + corpus.string() + " --out " +
                    metrics.string());
  CHECK(e.code == 0);
  CHECK(json::parse(last_line(e.out))["accuracy"] == 1.0);
  CHECK(json::parse(slurp(metrics))["accuracy"] == 1.0);

  const Run missing = run("evaluate --checkpoint " + (model / "checkpoint.bin").string() +
                          " --vocab " + (model / "vocab.txt").string());
  CHECK(missing.code == 1);
}
