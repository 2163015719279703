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

#include "miasig/search/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "miasig/errors.hpp"
#include "miasig/rng.hpp"

namespace miasig::search {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

std::vector<std::string> retrieval_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<double> embed_text(std::string_view text, std::size_t dim) {
  if (dim < 8) throw InvalidArgument("embedding dimension must be >= 8");
  std::vector<double> v(dim, 0.0);
  for (const auto& tok : retrieval_tokens(text)) {
    const std::uint64_t h = fnv1a64(tok);
    const double sign = (mix64(h) & 1) ? 1.0 : -1.0;
    v[h % dim] += sign;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("cosine of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Bm25::Bm25(const std::vector<std::string>& documents, double k1, double b) : k1_(k1), b_(b) {
  std::size_t total = 0;
  for (const auto& doc : documents) {
    auto& terms = doc_terms_.emplace_back();
    const auto tokens = retrieval_tokens(doc);
    for (const auto& t : tokens) ++terms[t];
    for (const auto& [t, _] : terms) ++doc_freq_[t];
    doc_len_.push_back(tokens.size());
    total += tokens.size();
  }
  if (!documents.empty()) avg_len_ = static_cast<double>(total) / static_cast<double>(documents.size());
}

double Bm25::idf(const std::string& term) const {
  auto it = doc_freq_.find(term);
  const double n = it == doc_freq_.end() ? 0.0 : static_cast<double>(it->second);
  const double N = static_cast<double>(doc_terms_.size());
  return std::log(1.0 + (N - n + 0.5) / (n + 0.5));
}

std::vector<double> Bm25::scores(std::string_view query) const {
  std::vector<double> out(doc_terms_.size(), 0.0);
  if (avg_len_ == 0.0) return out;
  for (const auto& term : retrieval_tokens(query)) {
    if (!doc_freq_.contains(term)) continue;
    const double w = idf(term);
    for (std::size_t d = 0; d < doc_terms_.size(); ++d) {
      auto it = doc_terms_[d].find(term);
      if (it == doc_terms_[d].end()) continue;
      const double tf = static_cast<double>(it->second);
      const double norm = 1.0 - b_ + b_ * static_cast<double>(doc_len_[d]) / avg_len_;
      out[d] += w * tf * (k1_ + 1.0) / (tf + k1_ * norm);
    }
  }
  return out;
}

std::vector<std::size_t> top_k_by_score(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });
  idx.resize(k);
  return idx;
}

}  // namespace miasig::search
