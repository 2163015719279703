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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace miasig::search {

/// Lowercased runs of ASCII letters and digits; bytes >= 0x80 are kept as
/// word characters so UTF-8 words survive intact.
std::vector<std::string> retrieval_tokens(std::string_view text);

/// Feature-hashed bag of words: each token adds +/-1 to one of `dim`
/// buckets (bucket and sign from FNV-1a), then the vector is l2-normalized.
/// Text without tokens maps to the zero vector.
std::vector<double> embed_text(std::string_view text, std::size_t dim);

/// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

/// Okapi BM25 over a fixed document set.
class Bm25 {
 public:
  static constexpr double kDefaultK1 = 1.5;
  static constexpr double kDefaultB = 0.75;

  explicit Bm25(const std::vector<std::string>& documents, double k1 = kDefaultK1, double b = kDefaultB);

  /// idf(t) = ln(1 + (N - n_t + 0.5) / (n_t + 0.5)), never negative.
  double idf(const std::string& term) const;

  /// One score per document, in document order. Repeated query terms count
  /// once per repetition.
  std::vector<double> scores(std::string_view query) const;

  std::size_t size() const noexcept { return doc_terms_.size(); }

 private:
  double k1_;
  double b_;
  double avg_len_ = 0.0;
  std::vector<std::unordered_map<std::string, std::size_t>> doc_terms_;
  std::vector<std::size_t> doc_len_;
  std::unordered_map<std::string, std::size_t> doc_freq_;
};

/// Indices of the k highest scores, best first; ties keep the lower index.
std::vector<std::size_t> top_k_by_score(std::span<const double> scores, std::size_t k);

}  // namespace miasig::search
