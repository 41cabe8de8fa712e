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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dbls/labels.hpp"

namespace dbls {

/// One user's concatenated posts with its annotated class.
struct PostRecord {
  std::string user_id;
  std::string text;
  std::size_t label = 0;

  bool operator==(const PostRecord&) const = default;
};

/// A generated record. `record.label` is the majority of `votes`;
/// `true_distribution` is the exact per-annotator vote probability vector the
/// votes were drawn from, and `true_class` the class the user was drawn in.
struct SynthRecord {
  PostRecord record;
  LabelDistribution true_distribution{};
  std::vector<std::size_t> votes;
  std::size_t true_class = 0;

  bool operator==(const SynthRecord&) const = default;
};

/// User counts per class in the reference corpus, SU, IN, ID, SB, AT order.
inline constexpr std::array<std::size_t, kClassCount> kReferenceClassCounts = {108, 99, 171, 77, 45};

LabelDistribution reference_class_prior();

struct SynthConfig {
  std::size_t users = 500;
  LabelDistribution class_prior = reference_class_prior();
  /// Target mean pairwise agreement between annotators.
  double agreement = 0.7;
  std::size_t annotators = 4;
  /// Chance that a marker slot holds a marker of the user's own class; the
  /// rest are markers of a uniformly drawn class.
  double marker_strength = 0.6;
  std::uint64_t seed = 1;

  std::size_t min_tokens = 24;
  std::size_t max_tokens = 56;
  /// Marker slots per post; every other token is filler.
  std::size_t markers_per_post = 3;
  std::size_t markers_per_class = 12;
  std::size_t filler_tokens = 300;

  void validate() const;
};

// --- JSON-lines ingestion --------------------------------------------------

/// One JSON object per line with user_id, text and label (two-letter code).
/// Blank lines are skipped. Malformed lines raise IngestionError naming the
/// line; an empty file raises ArgumentError.
std::vector<PostRecord> load_corpus(const std::filesystem::path& path);

/// As load_corpus, additionally requiring true_distribution and
/// annotator_votes.
std::vector<SynthRecord> load_synthetic_corpus(const std::filesystem::path& path);

void save_corpus(std::span<const PostRecord> records, const std::filesystem::path& path);
void save_synthetic_corpus(std::span<const SynthRecord> records,
                           const std::filesystem::path& path);

// --- splitting -------------------------------------------------------------

struct Split {
  std::vector<std::size_t> train;  // indices, ascending
  std::vector<std::size_t> test;   // indices, ascending
  std::vector<std::string> warnings;
};

/// Seeded stratified hold-out split over class labels. Each class sends the
/// floor of its share to the test side and the classes with the largest
/// remainders take one more, so the test total is round(test_fraction * n)
/// and every class is within one example of its share. Classes with fewer
/// than two examples stay whole in train and produce a warning.
Split split(std::span<const std::size_t> labels, double test_fraction, std::uint64_t seed);

Split split(std::span<const PostRecord> records, double test_fraction, std::uint64_t seed);

// --- synthetic generation --------------------------------------------------

/// Probability a with which each annotator votes the true class such that
/// the expected pairwise agreement under `prior` equals `agreement`. Misses
/// go to the ordinal neighbours in equal shares. Targets below chance or
/// below what a = 0.5 gives raise ArgumentError.
double calibrate_vote_accuracy(const LabelDistribution& prior, double agreement);

double expected_agreement(const LabelDistribution& prior, double vote_accuracy);

/// Vote probabilities for a user drawn in `true_class`: vote_accuracy on that
/// class, the rest split evenly over its ordinal neighbours.
LabelDistribution vote_distribution(std::size_t true_class, double vote_accuracy);

/// Majority class of `votes`; ties go to the lowest class index.
std::size_t majority_vote(std::span<const std::size_t> votes);

/// Mean over records of the fraction of annotator pairs that agree.
double pairwise_agreement(std::span<const SynthRecord> records);

std::vector<SynthRecord> generate_synthetic(const SynthConfig& config);

std::vector<PostRecord> records_of(std::span<const SynthRecord> records);

}  // namespace dbls
