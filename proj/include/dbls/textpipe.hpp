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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dbls/layers.hpp"

namespace dbls {

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnknownId = 1;
inline constexpr std::size_t kDefaultMaxLen = 5041;

/// Lowercases ASCII letters and splits on whitespace and punctuation. An
/// apostrophe survives only between two word characters ("it's" stays one
/// token); the typographic apostrophe U+2019 is folded to '. Bytes of
/// multi-byte UTF-8 sequences are treated as word characters.
std::vector<std::string> tokenize(std::string_view text);

/// Token <-> id map. Ids 0 and 1 are reserved for padding and unknown tokens;
/// every other token has a unique id >= 2.
class Vocabulary {
 public:
  Vocabulary();

  /// Adds `token` if absent and returns its id.
  TokenId add(const std::string& token);

  /// Id for `token`, or kUnknownId.
  TokenId lookup(std::string_view token) const;
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;

  /// Total id count, including the two reserved ids.
  std::size_t size() const noexcept { return tokens_.size(); }

  /// One token per line in id order starting at id 2.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> ids_;
  std::vector<std::string> tokens_;
};

/// Keeps the max_vocab - 2 most frequent tokens; ties go to the
/// lexicographically smaller token.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t max_vocab);

struct EncodedPost {
  std::vector<TokenId> ids;
  std::size_t true_length = 0;

  bool operator==(const EncodedPost&) const = default;
};

/// Maps tokens to ids (unknown -> kUnknownId), truncating at the end or
/// right-padding with kPadId to exactly max_len ids.
EncodedPost encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                   std::size_t max_len = kDefaultMaxLen);

}  // namespace dbls
