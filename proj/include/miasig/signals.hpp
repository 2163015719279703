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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "miasig/datamodel.hpp"

namespace miasig {

enum class SignalFamily { Text, Logit };

/// Tunables for every registered signal. Unset optionals fall back to the
/// per-signal default (top_fraction and top_k differ between signals).
struct SignalParams {
  std::size_t ngram = 4;             // max_coverage
  std::size_t d_max = 10;            // edit-distance based text signals
  double keep_fraction = 0.7;        // inv_freq_mismatch
  double alpha = 0.5;                // max_renyi
  std::optional<double> top_fraction;
  std::size_t passes = 5;            // rank_stability
  double sigma = 0.1;                // rank_stability
  std::uint64_t noise_seed = 0;      // rank_stability
  std::optional<std::size_t> top_k;
  double decay_scale = 8.0;          // log_ratio_variance
  std::size_t embed_dims = 128;      // neighbor_entropy_contrast
};

struct SignalInfo {
  std::string_view name;
  SignalFamily family;
  std::string_view summary;
};

std::span<const SignalInfo> registered_signals();

/// nullptr when the name is not registered.
const SignalInfo* find_signal(std::string_view name);

/// Throws InvalidArgument naming the signal when it is not registered.
const SignalInfo& require_signal(std::string_view name);

/// The parameters a given signal actually reads, with defaults resolved.
nlohmann::json effective_params(std::string_view name, const SignalParams& params);

/// Computes one score per sample, in dataset order. Fails on an unknown
/// signal, a family/kind mismatch, or any non-finite score (naming the
/// sample). `jobs` > 1 splits the samples across worker threads.
std::vector<ScoredSample> score_dataset(const Dataset& data, std::string_view name,
                                        const SignalParams& params, unsigned jobs = 1);

}  // namespace miasig
