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

#include "miasig/datamodel.hpp"

namespace miasig::text {

/// Whitespace tokens in order. Never contains empty strings.
using TokenSeq = std::vector<std::string>;
using Tokens = std::span<const std::string>;

inline TokenSeq tokens_of(std::string_view text) { return tokenize_whitespace(text); }

/// Joins tokens with single spaces. Tokens hold no whitespace, so the result
/// is an unambiguous key for the n-gram.
std::string ngram_key(Tokens ngram);

/// Fraction of positions in `x2` whose L-gram ending at that position occurs
/// somewhere in `x1`. The denominator is |x2|, so the first L-1 positions
/// (which end no full L-gram) always count as misses.
double ngram_coverage(Tokens x1, Tokens x2, std::size_t L);

/// Token-level Levenshtein distance saturated at d_max + 1. Runs a banded
/// DP and stops as soon as a whole row exceeds d_max.
std::size_t levenshtein_capped(Tokens a, Tokens b, std::size_t d_max);

/// levenshtein_capped / max(|a|, |b|), clamped to 1. Zero for two empty
/// sequences.
double normalized_edit_distance(Tokens a, Tokens b, std::size_t d_max);

/// Mean of the two middle values for even sizes. Empty input is an error.
double median(std::vector<double> values);

/// Longest common contiguous span of length >= 2; empty when there is none.
/// Ties go to the span starting earliest in `r`.
TokenSeq longest_contiguous_match(Tokens g, Tokens r);

/// Corpus-wide trigram occurrence counts. Absent trigrams count as 1.
class TrigramFreqTable {
 public:
  void add(Tokens seq);
  std::size_t count(std::string_view key) const;
  std::size_t count(Tokens trigram) const { return count(ngram_key(trigram)); }
  std::size_t distinct() const noexcept { return counts_.size(); }

 private:
  std::unordered_map<std::string, std::size_t> counts_;
};

TrigramFreqTable build_trigram_freq_table(std::span<const TokenSeq> corpus);

/// Table over every generation of every sample in a text dataset.
TrigramFreqTable build_trigram_freq_table(const Dataset& data);

// --- Signals -------------------------------------------------------------------
// Every signal is oriented so that a larger value means "more likely member",
// except inverse_frequency_mismatch, whose raw value is reported unflipped.

inline constexpr std::size_t kDefaultCoverageOrder = 4;
inline constexpr std::size_t kDefaultEditCap = 10;
inline constexpr double kDefaultKeepFraction = 0.7;

/// Max over generations of ngram_coverage(generation, suffix, L).
double signal_max_coverage(const TextSample& s, std::size_t L = kDefaultCoverageOrder);

/// Geometric mean of suffix proximity and inter-generation consistency, both
/// one minus a median normalized edit distance.
double signal_geometric_edit_distance(const TextSample& s, std::size_t d_max = kDefaultEditCap);

/// Sum over distinct generation trigrams of ln(1 / (freq * recurrence)).
double signal_rare_trigram_aggregation(const TextSample& s, const TrigramFreqTable& freq);

/// Max over generations of 1 - d * (1 - min(w / (N + 1), 1)), where w rewards
/// rare longest matches against the suffix's 1/2/3-gram table.
double signal_rarity_weighted_longest_match(const TextSample& s,
                                            std::size_t d_max = kDefaultEditCap);

/// Inverse-frequency-weighted positional mismatch against the suffix, maxed
/// over the closest keep_fraction of generations.
double signal_inverse_frequency_mismatch(const TextSample& s, std::size_t d_max = kDefaultEditCap,
                                         double keep_fraction = kDefaultKeepFraction);

/// Sum of 1/(1 + c) over suffix trigrams reproduced by at least two
/// generations.
double signal_recurrent_rare_trigram(const TextSample& s);

/// Mean over generations of excess repeated 3/4/5-grams per token.
double signal_internal_repetition(const TextSample& s);

}  // namespace miasig::text
