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

#include "dbls/textpipe.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "dbls/error.hpp"

namespace dbls {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

// U+2019 RIGHT SINGLE QUOTATION MARK in UTF-8.
constexpr std::string_view kCurlyApostrophe = "\xE2\x80\x99";

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };

  for (std::size_t i = 0; i < text.size();) {
    std::size_t apostrophe_len = 0;
    if (text[i] == '\'') {
      apostrophe_len = 1;
    } else if (text.substr(i, kCurlyApostrophe.size()) == kCurlyApostrophe) {
      apostrophe_len = kCurlyApostrophe.size();
    }
    if (apostrophe_len) {
      const std::size_t next = i + apostrophe_len;
      const bool inside = !current.empty() && next < text.size() &&
                          is_word_byte(static_cast<unsigned char>(text[next])) &&
                          text.substr(next, kCurlyApostrophe.size()) != kCurlyApostrophe;
      if (inside) {
        current += '\'';
      } else {
        flush();
      }
      i = next;
      continue;
    }
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    } else {
      flush();
    }
    ++i;
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary() : tokens_{"<pad>", "<unk>"} {}

TokenId Vocabulary::add(const std::string& token) {
  if (token.empty()) throw VocabularyError("vocabulary tokens must be non-empty");
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  ids_.emplace(token, id);
  tokens_.push_back(token);
  return id;
}

TokenId Vocabulary::lookup(std::string_view token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnknownId : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw VocabularyError("token id " + std::to_string(id) + " is outside a vocabulary of size " +
                          std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

bool Vocabulary::contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PersistenceError("cannot write vocabulary to " + path.string());
  for (std::size_t id = 2; id < tokens_.size(); ++id) out << tokens_[id] << '\n';
  if (!out) throw PersistenceError("failed writing vocabulary to " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot read vocabulary from " + path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      throw VocabularyError(path.string() + ":" + std::to_string(line_no) + ": empty token");
    }
    if (vocab.contains(line)) {
      throw VocabularyError(path.string() + ":" + std::to_string(line_no) + ": duplicate token '" +
                            line + "'");
    }
    vocab.add(line);
  }
  return vocab;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t max_vocab) {
  if (max_vocab < 3) {
    throw ArgumentError("max_vocab must be at least 3, got " + std::to_string(max_vocab));
  }
  if (corpus.empty()) throw ArgumentError("cannot build a vocabulary from an empty corpus");

  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus) {
    for (const auto& tok : doc) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // counts is already in lexicographic order, so a stable sort on frequency
  // keeps the tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  const std::size_t keep = std::min(ranked.size(), max_vocab - 2);
  for (std::size_t i = 0; i < keep; ++i) vocab.add(ranked[i].first);
  return vocab;
}

EncodedPost encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                   std::size_t max_len) {
  if (max_len == 0) throw ArgumentError("max_len must be positive");
  EncodedPost post;
  post.ids.assign(max_len, kPadId);
  post.true_length = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < post.true_length; ++i) post.ids[i] = vocab.lookup(tokens[i]);
  return post;
}

}  // namespace dbls
