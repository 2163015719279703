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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace miasig {

enum class Membership : std::uint8_t { NonMember = 0, Member = 1 };

inline bool is_member(Membership m) { return m == Membership::Member; }

/// Splits on ASCII whitespace; never yields empty tokens.
std::vector<std::string> tokenize_whitespace(std::string_view text);

/// One black-box instance: a target text cut into prefix and suffix, plus the
/// continuations the target model sampled from the prefix.
struct TextSample {
  std::string id;
  Membership label = Membership::NonMember;
  std::string original_text;
  std::string prefix;
  std::string ground_truth_suffix;
  std::vector<std::string> suffix_generations;

  friend bool operator==(const TextSample&, const TextSample&) = default;
};

/// Row-major L x V matrix of float32 logits.
class LogitMatrix {
 public:
  LogitMatrix() = default;
  LogitMatrix(std::size_t rows, std::size_t cols);
  LogitMatrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<float> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }

  float operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  float& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  const std::vector<float>& values() const noexcept { return values_; }

  friend bool operator==(const LogitMatrix&, const LogitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

/// One gray-box instance: per-position logits and the realized next tokens.
struct LogitSample {
  std::string id;
  LogitMatrix logits;
  std::vector<std::uint32_t> true_tokens;
  Membership label = Membership::NonMember;
};

/// Bitwise comparison of logits, so NaN payloads and -0.0 are distinguished.
bool bit_identical(const LogitSample& a, const LogitSample& b);

struct ScoredSample {
  std::string id;
  double score = 0.0;
  Membership label = Membership::NonMember;
};

/// Throws InvalidArgument when a sample breaks its type invariants.
void validate(const TextSample& sample);
void validate(const LogitSample& sample);

enum class DatasetKind { Text, Logit };

/// Ordered, homogeneous collection of samples with unique ids.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<TextSample> samples);
  explicit Dataset(std::vector<LogitSample> samples);

  DatasetKind kind() const noexcept {
    return std::holds_alternative<std::vector<TextSample>>(samples_) ? DatasetKind::Text
                                                                     : DatasetKind::Logit;
  }
  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }

  const std::vector<TextSample>& text_samples() const;
  const std::vector<LogitSample>& logit_samples() const;

  std::vector<std::string> ids() const;
  std::vector<Membership> labels() const;

 private:
  std::variant<std::vector<TextSample>, std::vector<LogitSample>> samples_;
};

// --- Text samples (JSON Lines) ---------------------------------------------

nlohmann::json to_json(const TextSample& sample, bool include_label = true);

/// Parses one JSON Lines record. When require_label is false a missing
/// `label` key is accepted and read as non-member (candidate programs receive
/// records with labels stripped).
TextSample parse_text_sample(std::string_view line, std::size_t line_no,
                             bool require_label = true);

Dataset read_text_samples(std::istream& in, bool require_label = true);
Dataset load_text_samples(const std::filesystem::path& path);
void write_text_samples(std::ostream& out, std::span<const TextSample> samples,
                        bool include_label = true);
void write_text_samples(const std::filesystem::path& path, std::span<const TextSample> samples);

/// Cuts a whitespace-tokenized text so that floor(prefix_fraction * n)
/// tokens (clamped to [1, n-1]) form the prefix. Tokens are re-joined with a
/// single space. Needs at least two tokens.
std::pair<std::string, std::string> split_prefix_suffix(std::string_view original_text,
                                                        double prefix_fraction = 0.7);

// --- Logit container ---------------------------------------------------------
//
// Little-endian layout:
//   "MIAL" | u32 version=1 | u32 L | u32 V | f32[L*V] row-major logits
//   | u32[L] true tokens | u8 label | u32 id length | id bytes (UTF-8)

inline constexpr std::uint32_t kLogitFormatVersion = 1;

std::vector<std::uint8_t> encode_logit_sample(const LogitSample& sample);
LogitSample decode_logit_sample(std::span<const std::uint8_t> bytes);

LogitSample load_logit_sample(const std::filesystem::path& path);
void write_logit_sample(const std::filesystem::path& path, const LogitSample& sample);

/// Loads every *.mial file in a directory, ordered by file name.
Dataset load_logit_dir(const std::filesystem::path& dir);

/// Text datasets from *.jsonl files, logit datasets from directories.
Dataset load_dataset(const std::filesystem::path& path);

// --- Splitting ---------------------------------------------------------------

/// Seeded shuffle, then the first ceil(n/2) samples go to train and the rest
/// to test.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, std::uint64_t seed);

}  // namespace miasig
