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

#include "miasig/text_signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "miasig/errors.hpp"

namespace miasig::text {

namespace {

std::vector<TokenSeq> generation_tokens(const TextSample& s) {
  std::vector<TokenSeq> out;
  out.reserve(s.suffix_generations.size());
  for (const auto& g : s.suffix_generations) out.push_back(tokens_of(g));
  return out;
}

/// Distinct n-gram keys of a sequence.
std::unordered_set<std::string> distinct_ngrams(Tokens seq, std::size_t n) {
  std::unordered_set<std::string> out;
  if (seq.size() < n) return out;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) out.insert(ngram_key(seq.subspan(i, n)));
  return out;
}

std::unordered_map<std::string, std::size_t> ngram_counts(Tokens seq, std::size_t n) {
  std::unordered_map<std::string, std::size_t> out;
  if (seq.size() < n) return out;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) ++out[ngram_key(seq.subspan(i, n))];
  return out;
}

/// Number of times `span` occurs contiguously in `seq`.
std::size_t occurrences(Tokens span, Tokens seq) {
  if (span.empty() || span.size() > seq.size()) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + span.size() <= seq.size(); ++i) {
    if (std::equal(span.begin(), span.end(), seq.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
  }
  return n;
}

}  // namespace

std::string ngram_key(Tokens ngram) {
  std::string key;
  for (std::size_t i = 0; i < ngram.size(); ++i) {
    if (i) key += ' ';
    key += ngram[i];
  }
  return key;
}

double ngram_coverage(Tokens x1, Tokens x2, std::size_t L) {
  if (L == 0) throw InvalidArgument("ngram_coverage: L must be >= 1");
  if (x2.empty()) return 0.0;
  const auto reference = distinct_ngrams(x1, L);
  std::size_t hits = 0;
  for (std::size_t end = L - 1; end < x2.size(); ++end) {
    if (reference.contains(ngram_key(x2.subspan(end + 1 - L, L)))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x2.size());
}

std::size_t levenshtein_capped(Tokens a, Tokens b, std::size_t d_max) {
  if (d_max == 0) throw InvalidArgument("levenshtein_capped: d_max must be >= 1");
  const std::size_t cap = d_max + 1;
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return std::min(m, cap);
  if (m == 0) return std::min(n, cap);
  if ((n > m ? n - m : m - n) > d_max) return cap;

  std::vector<std::size_t> prev(m + 1), cur(m + 1, cap);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = std::min(j, cap);

  for (std::size_t i = 1; i <= n; ++i) {
    // Cells with |i - j| > d_max cannot be <= d_max; only the band is filled
    // and its two neighbours are pinned to the cap.
    const std::size_t lo = i > d_max ? i - d_max : 1;
    const std::size_t hi = std::min(m, i + d_max);
    cur[lo - 1] = lo == 1 ? std::min(i, cap) : cap;
    std::size_t row_min = cur[lo - 1];
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const std::size_t del = prev[j] + 1;
      const std::size_t ins = cur[j - 1] + 1;
      cur[j] = std::min({sub, del, ins, cap});
      row_min = std::min(row_min, cur[j]);
    }
    if (hi < m) cur[hi + 1] = cap;
    if (row_min > d_max) return cap;
    std::swap(prev, cur);
  }
  return std::min(prev[m], cap);
}

double normalized_edit_distance(Tokens a, Tokens b, std::size_t d_max) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  const double d = static_cast<double>(levenshtein_capped(a, b, d_max)) / static_cast<double>(longest);
  return std::min(d, 1.0);
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

TokenSeq longest_contiguous_match(Tokens g, Tokens r) {
  // run[j] = length of the common run ending at g[i-1], r[j-1].
  std::vector<std::size_t> run(r.size() + 1, 0), next(r.size() + 1, 0);
  std::size_t best_len = 0;
  std::size_t best_start = 0;
  for (std::size_t i = 1; i <= g.size(); ++i) {
    for (std::size_t j = 1; j <= r.size(); ++j) {
      next[j] = g[i - 1] == r[j - 1] ? run[j - 1] + 1 : 0;
      const std::size_t len = next[j];
      if (len == 0) continue;
      const std::size_t start = j - len;
      if (len > best_len || (len == best_len && start < best_start)) {
        best_len = len;
        best_start = start;
      }
    }
    std::swap(run, next);
  }
  if (best_len < 2) return {};
  return TokenSeq(r.begin() + static_cast<std::ptrdiff_t>(best_start),
                  r.begin() + static_cast<std::ptrdiff_t>(best_start + best_len));
}

// --- Trigram table -------------------------------------------------------------

void TrigramFreqTable::add(Tokens seq) {
  if (seq.size() < 3) return;
  for (std::size_t i = 0; i + 3 <= seq.size(); ++i) ++counts_[ngram_key(seq.subspan(i, 3))];
}

std::size_t TrigramFreqTable::count(std::string_view key) const {
  auto it = counts_.find(std::string(key));
  return it == counts_.end() ? 1 : it->second;
}

TrigramFreqTable build_trigram_freq_table(std::span<const TokenSeq> corpus) {
  TrigramFreqTable table;
  for (const auto& seq : corpus) table.add(seq);
  return table;
}

TrigramFreqTable build_trigram_freq_table(const Dataset& data) {
  TrigramFreqTable table;
  for (const auto& s : data.text_samples()) {
    for (const auto& g : s.suffix_generations) table.add(tokens_of(g));
  }
  return table;
}

// --- Signals -------------------------------------------------------------------

double signal_max_coverage(const TextSample& s, std::size_t L) {
  const auto suffix = tokens_of(s.ground_truth_suffix);
  double best = 0.0;
  for (const auto& g : s.suffix_generations) {
    best = std::max(best, ngram_coverage(tokens_of(g), suffix, L));
  }
  return best;
}

double signal_geometric_edit_distance(const TextSample& s, std::size_t d_max) {
  const auto suffix = tokens_of(s.ground_truth_suffix);
  const auto gens = generation_tokens(s);

  std::vector<double> to_suffix;
  to_suffix.reserve(gens.size());
  for (const auto& g : gens) to_suffix.push_back(normalized_edit_distance(g, suffix, d_max));
  const double proximity = 1.0 - median(std::move(to_suffix));

  double consistency = 1.0;
  if (gens.size() >= 2) {
    std::vector<double> pairwise;
    pairwise.reserve(gens.size() * (gens.size() - 1) / 2);
    for (std::size_t i = 0; i < gens.size(); ++i) {
      for (std::size_t j = i + 1; j < gens.size(); ++j) {
        pairwise.push_back(normalized_edit_distance(gens[i], gens[j], d_max));
      }
    }
    consistency = 1.0 - median(std::move(pairwise));
  }
  return std::clamp(std::sqrt(std::max(proximity * consistency, 0.0)), 0.0, 1.0);
}

double signal_rare_trigram_aggregation(const TextSample& s, const TrigramFreqTable& freq) {
  std::unordered_map<std::string, std::size_t> recurrence;
  for (const auto& g : s.suffix_generations) {
    for (auto& key : distinct_ngrams(tokens_of(g), 3)) ++recurrence[key];
  }
  // Sum in sorted key order so the result does not depend on hash layout.
  std::vector<std::pair<std::string, std::size_t>> items(recurrence.begin(), recurrence.end());
  std::sort(items.begin(), items.end());
  double total = 0.0;
  for (const auto& [key, r] : items) {
    total -= std::log(static_cast<double>(freq.count(key)) * static_cast<double>(r));
  }
  return total;
}

double signal_rarity_weighted_longest_match(const TextSample& s, std::size_t d_max) {
  const auto suffix = tokens_of(s.ground_truth_suffix);
  std::unordered_map<std::string, std::size_t> table;
  std::size_t total = 0;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (auto& [key, c] : ngram_counts(suffix, n)) {
      table[key] += c;
      total += c;
    }
  }
  const double N = static_cast<double>(total);

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& g : generation_tokens(s)) {
    const double dist = normalized_edit_distance(g, suffix, d_max);
    const auto match = longest_contiguous_match(g, suffix);
    double weight;
    if (match.size() >= 2) {
      // Spans longer than a trigram are not in the table; count them directly.
      const std::size_t c = match.size() <= 3 ? table.at(ngram_key(match)) : occurrences(match, suffix);
      weight = N / static_cast<double>(c);
    } else {
      weight = N / static_cast<double>(suffix.size());
    }
    const double f = 1.0 - dist * (1.0 - std::min(weight / (N + 1.0), 1.0));
    best = std::max(best, f);
  }
  return best;
}

double signal_inverse_frequency_mismatch(const TextSample& s, std::size_t d_max, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw InvalidArgument("keep_fraction must lie in (0, 1]");
  }
  const auto suffix = tokens_of(s.ground_truth_suffix);
  const std::size_t L = suffix.size();
  std::unordered_map<std::string_view, double> weight;
  for (const auto& t : suffix) weight[t] += 1.0;
  for (auto& [t, c] : weight) c = static_cast<double>(L) / c;

  auto gens = generation_tokens(s);
  struct Ranked {
    double distance;
    const TokenSeq* tokens;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(gens.size());
  for (const auto& g : gens) {
    ranked.push_back({static_cast<double>(levenshtein_capped(g, suffix, d_max)) / static_cast<double>(L), &g});
  }
  // Equal distances are ordered by content so the kept set does not depend
  // on generation order.
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    return *x.tokens < *y.tokens;
  });
  const double want = std::ceil(keep_fraction * static_cast<double>(gens.size()) - 1e-9);
  const std::size_t keep = std::clamp<std::size_t>(static_cast<std::size_t>(want), 1, gens.size());

  double best = 0.0;
  for (std::size_t k = 0; k < keep; ++k) {
    const auto& g = *ranked[k].tokens;
    double m = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      if (i >= g.size() || g[i] != suffix[i]) m += weight.at(suffix[i]);
    }
    best = k == 0 ? m : std::max(best, m);
  }
  return best;
}

double signal_recurrent_rare_trigram(const TextSample& s) {
  const auto suffix_counts = ngram_counts(tokens_of(s.ground_truth_suffix), 3);
  if (suffix_counts.empty()) return 0.0;
  std::unordered_map<std::string, std::size_t> appearances;
  for (const auto& g : s.suffix_generations) {
    for (const auto& key : distinct_ngrams(tokens_of(g), 3)) {
      if (suffix_counts.contains(key)) ++appearances[key];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> items(appearances.begin(), appearances.end());
  std::sort(items.begin(), items.end());
  double total = 0.0;
  for (const auto& [key, a] : items) {
    if (a >= 2) total += 1.0 / (1.0 + static_cast<double>(suffix_counts.at(key)));
  }
  return total;
}

double signal_internal_repetition(const TextSample& s) {
  double sum = 0.0;
  for (const auto& g : generation_tokens(s)) {
    if (g.empty()) continue;
    std::size_t excess = 0;
    for (std::size_t n = 3; n <= 5; ++n) {
      for (const auto& [_, c] : ngram_counts(g, n)) {
        if (c >= 2) excess += c - 1;
      }
    }
    sum += static_cast<double>(excess) / static_cast<double>(g.size());
  }
  return sum / static_cast<double>(s.suffix_generations.size());
}

}  // namespace miasig::text
