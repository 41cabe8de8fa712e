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

#include "dbls/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "dbls/error.hpp"
#include "dbls/rng.hpp"
#include "json.hpp"

namespace dbls {

using nlohmann::json;

LabelDistribution reference_class_prior() {
  const double total = static_cast<double>(
      std::accumulate(kReferenceClassCounts.begin(), kReferenceClassCounts.end(), std::size_t{0}));
  LabelDistribution prior{};
  for (std::size_t k = 0; k < kClassCount; ++k) {
    prior[k] = static_cast<double>(kReferenceClassCounts[k]) / total;
  }
  return prior;
}

void SynthConfig::validate() const {
  if (users == 0) throw ArgumentError("synthetic corpus needs at least one user");
  if (!is_distribution(class_prior, 1e-9)) {
    throw ArgumentError("class_prior must be a distribution, got " + format_distribution(class_prior));
  }
  if (!(agreement > 0.0 && agreement <= 1.0)) {
    throw ArgumentError("agreement must lie in (0, 1], got " + std::to_string(agreement));
  }
  if (annotators == 0) throw ArgumentError("need at least one annotator");
  if (!(marker_strength >= 0.0 && marker_strength <= 1.0)) {
    throw ArgumentError("marker_strength must lie in [0, 1], got " + std::to_string(marker_strength));
  }
  if (min_tokens == 0 || min_tokens > max_tokens) {
    throw ArgumentError("token range [" + std::to_string(min_tokens) + ", " +
                        std::to_string(max_tokens) + "] is empty");
  }
  if (markers_per_post == 0 || markers_per_class == 0 || filler_tokens == 0) {
    throw ArgumentError("marker and filler pools must be non-empty");
  }
}

// --- JSON-lines ------------------------------------------------------------

namespace {

[[noreturn]] void bad_line(const std::filesystem::path& path, std::size_t line,
                           const std::string& what) {
  throw IngestionError(path.string() + ":" + std::to_string(line) + ": " + what);
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open corpus " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::size_t parsed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      bad_line(path, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) bad_line(path, line_no, "expected a JSON object");
    fn(obj, line_no);
    ++parsed;
  }
  if (parsed == 0) throw ArgumentError("corpus " + path.string() + " is empty");
}

std::string string_field(const json& obj, const char* key, const std::filesystem::path& path,
                         std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    bad_line(path, line, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::size_t code_to_class(const std::string& code, const std::filesystem::path& path,
                          std::size_t line) {
  for (std::size_t k = 0; k < kClassCount; ++k) {
    if (kClassCodes[k] == code) return k;
  }
  bad_line(path, line, "unknown label code '" + code + "'");
}

PostRecord parse_record(const json& obj, const std::filesystem::path& path, std::size_t line) {
  PostRecord r;
  r.user_id = string_field(obj, "user_id", path, line);
  r.text = string_field(obj, "text", path, line);
  if (r.text.empty()) bad_line(path, line, "empty text");
  r.label = code_to_class(string_field(obj, "label", path, line), path, line);
  return r;
}

json record_json(const PostRecord& r) {
  return json{{"user_id", r.user_id}, {"text", r.text}, {"label", std::string(class_code(r.label))}};
}

void write_lines(const std::filesystem::path& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot write corpus " + path.string());
  for (const auto& row : rows) out << row.dump() << '\n';
  if (!out) throw PersistenceError("failed writing corpus " + path.string());
}

}  // namespace

std::vector<PostRecord> load_corpus(const std::filesystem::path& path) {
  std::vector<PostRecord> records;
  for_each_line(path, [&](const json& obj, std::size_t line) {
    records.push_back(parse_record(obj, path, line));
  });
  return records;
}

std::vector<SynthRecord> load_synthetic_corpus(const std::filesystem::path& path) {
  std::vector<SynthRecord> records;
  for_each_line(path, [&](const json& obj, std::size_t line) {
    SynthRecord s;
    s.record = parse_record(obj, path, line);
    auto dist = obj.find("true_distribution");
    if (dist == obj.end() || !dist->is_array() || dist->size() != kClassCount) {
      bad_line(path, line, "true_distribution must be an array of 5 numbers");
    }
    for (std::size_t k = 0; k < kClassCount; ++k) {
      if (!(*dist)[k].is_number()) bad_line(path, line, "true_distribution must hold numbers");
      s.true_distribution[k] = (*dist)[k].get<double>();
    }
    if (!is_distribution(s.true_distribution, 1e-6)) {
      bad_line(path, line, "true_distribution does not sum to 1");
    }
    auto votes = obj.find("annotator_votes");
    if (votes == obj.end() || !votes->is_array()) {
      bad_line(path, line, "annotator_votes must be an array of label codes");
    }
    for (const auto& v : *votes) {
      if (!v.is_string()) bad_line(path, line, "annotator_votes must hold label codes");
      s.votes.push_back(code_to_class(v.get<std::string>(), path, line));
    }
    s.true_class = argmax(s.true_distribution);
    records.push_back(std::move(s));
  });
  return records;
}

void save_corpus(std::span<const PostRecord> records, const std::filesystem::path& path) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(record_json(r));
  write_lines(path, rows);
}

void save_synthetic_corpus(std::span<const SynthRecord> records,
                           const std::filesystem::path& path) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& s : records) {
    json row = record_json(s.record);
    row["true_distribution"] = json(std::vector<double>(s.true_distribution.begin(),
                                                        s.true_distribution.end()));
    json votes = json::array();
    for (std::size_t v : s.votes) votes.push_back(std::string(class_code(v)));
    row["annotator_votes"] = std::move(votes);
    rows.push_back(std::move(row));
  }
  write_lines(path, rows);
}

// --- splitting -------------------------------------------------------------

Split split(std::span<const std::size_t> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("test_fraction must lie in (0, 1), got " + std::to_string(test_fraction));
  }
  std::size_t classes = 0;
  for (std::size_t l : labels) classes = std::max(classes, l + 1);
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  Split out;
  std::vector<std::size_t> quota(classes, 0);
  std::vector<double> remainder(classes, -1.0);
  std::size_t eligible = 0;
  for (std::size_t k = 0; k < classes; ++k) {
    const std::size_t n = members[k].size();
    if (n == 0) continue;
    if (n < 2) {
      out.warnings.push_back("class " + std::to_string(k) + " has " + std::to_string(n) +
                             " example(s); kept whole in train");
      continue;
    }
    eligible += n;
    const double share = test_fraction * static_cast<double>(n);
    quota[k] = static_cast<std::size_t>(std::floor(share));
    remainder[k] = share - std::floor(share);
  }
  const auto target = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(eligible)));
  std::size_t assigned = std::accumulate(quota.begin(), quota.end(), std::size_t{0});

  std::vector<std::size_t> order(classes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k : order) {
    if (assigned >= target) break;
    if (remainder[k] <= 0.0 || quota[k] + 1 >= members[k].size()) continue;
    ++quota[k];
    ++assigned;
  }

  Rng rng(seed);
  for (std::size_t k = 0; k < classes; ++k) {
    auto& idx = members[k];
    shuffle(idx, rng);
    out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<long>(quota[k]));
    out.train.insert(out.train.end(), idx.begin() + static_cast<long>(quota[k]), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Split split(std::span<const PostRecord> records, double test_fraction, std::uint64_t seed) {
  std::vector<std::size_t> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(r.label);
  return split(labels, test_fraction, seed);
}

// --- synthetic generation --------------------------------------------------

namespace {

std::vector<std::size_t> neighbours(std::size_t k) {
  std::vector<std::size_t> out;
  if (k > 0) out.push_back(k - 1);
  if (k + 1 < kClassCount) out.push_back(k + 1);
  return out;
}

// Below this the true class stops being the most likely vote.
constexpr double kMinVoteAccuracy = 0.5;
constexpr double kChanceAgreement = 1.0 / static_cast<double>(kClassCount);

std::string marker_token(std::size_t k, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%c%02zu", kClassCodes[k][0] + ('a' - 'A'),
                kClassCodes[k][1] + ('a' - 'A'), i);
  return buf;
}

std::string filler_token(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "w%03zu", i);
  return buf;
}

}  // namespace

LabelDistribution vote_distribution(std::size_t true_class, double vote_accuracy) {
  if (true_class >= kClassCount) throw ArgumentError("class index out of range");
  LabelDistribution p{};
  p[true_class] = vote_accuracy;
  const auto near = neighbours(true_class);
  for (std::size_t n : near) p[n] += (1.0 - vote_accuracy) / static_cast<double>(near.size());
  return p;
}

double expected_agreement(const LabelDistribution& prior, double vote_accuracy) {
  double total = 0.0;
  for (std::size_t k = 0; k < kClassCount; ++k) {
    // P(two votes agree) = a^2 + sum over neighbours of ((1 - a) / m)^2.
    const double m = static_cast<double>(neighbours(k).size());
    const double miss = 1.0 - vote_accuracy;
    total += prior[k] * (vote_accuracy * vote_accuracy + miss * miss / m);
  }
  return total;
}

double calibrate_vote_accuracy(const LabelDistribution& prior, double agreement) {
  if (!(agreement >= kChanceAgreement)) {
    throw ArgumentError("agreement " + std::to_string(agreement) +
                        " is below chance level 0.2 and cannot be reached");
  }
  if (agreement > 1.0) throw ArgumentError("agreement cannot exceed 1");
  const double reachable = expected_agreement(prior, kMinVoteAccuracy);
  if (agreement < reachable) {
    throw ArgumentError("agreement " + std::to_string(agreement) +
                        " is unreachable with neighbour confusions; the minimum for this prior is " +
                        std::to_string(reachable));
  }
  if (agreement >= 1.0) return 1.0;
  // Agreement increases with a on [0.5, 1].
  double lo = kMinVoteAccuracy;
  double hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (expected_agreement(prior, mid) < agreement ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::size_t majority_vote(std::span<const std::size_t> votes) {
  if (votes.empty()) throw ArgumentError("majority of an empty vote list");
  std::array<std::size_t, kClassCount> counts{};
  for (std::size_t v : votes) {
    if (v >= kClassCount) throw ArgumentError("vote class out of range");
    ++counts[v];
  }
  // max_element returns the first maximum, i.e. the lowest class index.
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double pairwise_agreement(std::span<const SynthRecord> records) {
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& r : records) {
    const auto& v = r.votes;
    if (v.size() < 2) continue;
    std::size_t agree = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        agree += v[i] == v[j];
        ++pairs;
      }
    }
    total += static_cast<double>(agree) / static_cast<double>(pairs);
    ++counted;
  }
  if (counted == 0) throw ArgumentError("pairwise agreement needs records with two or more votes");
  return total / static_cast<double>(counted);
}

std::vector<SynthRecord> generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const double vote_accuracy = calibrate_vote_accuracy(cfg.class_prior, cfg.agreement);

  std::vector<std::vector<std::string>> markers(kClassCount);
  for (std::size_t k = 0; k < kClassCount; ++k) {
    for (std::size_t i = 0; i < cfg.markers_per_class; ++i) markers[k].push_back(marker_token(k, i));
  }
  std::vector<std::string> filler;
  for (std::size_t i = 0; i < cfg.filler_tokens; ++i) filler.push_back(filler_token(i));

  Rng rng(cfg.seed);
  std::vector<SynthRecord> out;
  out.reserve(cfg.users);
  const int id_width = static_cast<int>(std::to_string(cfg.users).size());
  for (std::size_t u = 0; u < cfg.users; ++u) {
    SynthRecord s;
    s.true_class = rng.categorical(cfg.class_prior);
    s.true_distribution = vote_distribution(s.true_class, vote_accuracy);

    const std::size_t length = cfg.min_tokens + rng.index(cfg.max_tokens - cfg.min_tokens + 1);
    std::vector<std::string> tokens(length);
    for (auto& t : tokens) t = filler[rng.index(filler.size())];
    std::vector<std::size_t> slots(length);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    shuffle(slots, rng);
    const std::size_t marked = std::min(cfg.markers_per_post, length);
    for (std::size_t m = 0; m < marked; ++m) {
      const std::size_t k =
          rng.bernoulli(cfg.marker_strength) ? s.true_class : rng.index(kClassCount);
      tokens[slots[m]] = markers[k][rng.index(markers[k].size())];
    }
    std::string text;
    for (std::size_t t = 0; t < length; ++t) {
      if (t) text += ' ';
      text += tokens[t];
    }

    for (std::size_t a = 0; a < cfg.annotators; ++a) {
      s.votes.push_back(rng.categorical(s.true_distribution));
    }
    char id[32];
    std::snprintf(id, sizeof id, "user%0*zu", id_width, u);
    s.record = PostRecord{id, std::move(text), majority_vote(s.votes)};
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PostRecord> records_of(std::span<const SynthRecord> records) {
  std::vector<PostRecord> out;
  out.reserve(records.size());
  for (const auto& s : records) out.push_back(s.record);
  return out;
}

}  // namespace dbls
