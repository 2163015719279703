// Copyright 2026 The miasig Authors
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
#include <fstream>
#include <memory>
#include <string_view>
#include <vector>

#include "miasig/search/types.hpp"

namespace miasig::search {

enum class RecordField { Idea, Justification, Analysis };

/// Append-only store of experiment records with lineage and retrieval.
/// Records are immutable once inserted; ids are 0, 1, 2, ... in insertion
/// order. When a journal is attached every insert is appended to it as one
/// JSON line and flushed.
class ExperimentDb {
 public:
  explicit ExperimentDb(std::size_t embed_dim = 256);

  /// Assigns the next id and stores the record. Throws InvalidArgument when
  /// the record breaks an invariant (empty idea, status/metrics mismatch,
  /// dangling parent).
  ExperimentId insert(ExperimentRecord record);

  void attach_journal(const std::filesystem::path& path);

  /// Rebuilds a database from a journal; embeddings are recomputed.
  static ExperimentDb load_journal(const std::filesystem::path& path, std::size_t embed_dim = 256);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<ExperimentRecord>& records() const noexcept { return records_; }
  const ExperimentRecord& get(ExperimentId id) const;
  std::size_t embed_dim() const noexcept { return embed_dim_; }

  bool has_scored() const;

  /// Top-k records by cosine between embed_text(query) and the stored field
  /// embedding; ties go to the lower id.
  std::vector<ExperimentRecord> semantic_nn(std::string_view query, RecordField field, std::size_t k) const;

  /// Top-k records by BM25 over "idea justification" documents; ties go to
  /// the lower id.
  std::vector<ExperimentRecord> bm25(std::string_view query, std::size_t k) const;

  /// Ancestors of `id`, root first, excluding the record itself.
  std::vector<ExperimentRecord> ancestors(ExperimentId id) const;

  /// Other records sharing the parent of `id`. Empty for root records.
  std::vector<ExperimentRecord> siblings(ExperimentId id) const;

  ExperimentId root_of(ExperimentId id) const;

 private:
  struct Embeddings {
    std::vector<double> idea;
    std::vector<double> justification;
    std::vector<double> analysis;
  };

  std::size_t embed_dim_;
  std::vector<ExperimentRecord> records_;
  std::vector<Embeddings> embeddings_;
  std::unique_ptr<std::ofstream> journal_;
};

}  // namespace miasig::search
