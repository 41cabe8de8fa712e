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

#include <stdexcept>
#include <string>

namespace dbls {

// Every failure raised by the library derives from Error. kind() is a short
// stable tag used by the CLI when it reports a machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DBLS_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(tag, what) {}       \
  };

DBLS_DEFINE_ERROR(DimensionError, "dimension")
DBLS_DEFINE_ERROR(ArgumentError, "argument")
DBLS_DEFINE_ERROR(VocabularyError, "vocabulary")
DBLS_DEFINE_ERROR(StateError, "state")
DBLS_DEFINE_ERROR(TrainingError, "training")
DBLS_DEFINE_ERROR(PersistenceError, "persistence")
DBLS_DEFINE_ERROR(ConfigurationError, "configuration")
DBLS_DEFINE_ERROR(IngestionError, "ingestion")

#undef DBLS_DEFINE_ERROR

}  // namespace dbls
