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
#include <span>
#include <string_view>
#include <vector>

#include "miasig/datamodel.hpp"

namespace miasig::logit {

/// log(softmax(z)) with max subtraction.
std::vector<double> log_softmax_row(std::span<const double> z);
std::vector<double> log_softmax_row(std::span<const float> z);

/// (1 / (1 - alpha)) * ln(sum p_i^alpha). alpha > 0, alpha != 1.
double renyi_entropy(std::span<const double> p, double alpha);

/// Renyi entropy of softmax(z) evaluated from log-probabilities, which stays
/// finite for extreme logits.
double renyi_entropy_from_log_probs(std::span<const double> log_p, double alpha);

double shannon_entropy(std::span<const double> p);
double shannon_entropy_from_log_probs(std::span<const double> log_p);

/// Indices of the k largest entries, largest first; ties go to the lower
/// index.
std::vector<std::uint32_t> top_k_indices(std::span<const double> values, std::size_t k);

/// Upper-tail percentile cut. Returns the 1-based rank (in ascending order)
/// of the threshold value for quantile q over n values: floor(q * n) + 1,
/// clamped to [1, n]. Without ties, selecting every value >= the threshold
/// keeps exactly max(1, n - floor(q * n)) values.
std::size_t upper_tail_rank(double q, std::size_t n);

/// Mean of the values at or above the q-quantile cut.
double mean_above_quantile(std::span<const double> values, double q);

/// Gaussian logit perturbation standing in for stochastic dropout passes.
struct NoiseSpec {
  std::size_t passes = 5;
  double sigma = 0.1;
  std::uint64_t seed = 0;
};

/// Seed of pass `pass` for sample `sample_id`.
std::uint64_t noise_stream_seed(std::uint64_t seed, std::string_view sample_id, std::size_t pass);

/// Normalized inversion count between two concatenated top-k vectors. Both
/// are cut into consecutive windows of k entries (one window per position);
/// within a window, pairs of values present in both are counted when their
/// relative order differs, and the count is divided by C(k, 2). The result is
/// the mean over windows; a window with fewer than two common values scores 0.
double pairwise_rank_inversion(std::span<const std::uint32_t> r1, std::span<const std::uint32_t> r2,
                               std::size_t k = 10);

// --- Signals -------------------------------------------------------------------

/// Negated mean Renyi entropy of the ceil(top_fraction * L) lowest-entropy
/// positions.
double signal_max_renyi(const LogitSample& s, double alpha = 0.5, double top_fraction = 0.10);

/// Negated mean pairwise top-k rank disagreement across noisy passes.
double signal_rank_stability(const LogitSample& s, const NoiseSpec& noise = {}, std::size_t k = 10);

/// Mean of the upper top_fraction tail of position-decayed variances of the
/// true-token log-ratio gaps against the five strongest alternatives.
double signal_log_ratio_variance(const LogitSample& s, double decay_scale = 8.0,
                                 double top_fraction = 0.05);

/// Mean of the upper top_fraction tail of per-position mean top-k
/// log-probabilities.
double signal_topk_confidence(const LogitSample& s, std::size_t k = 5, double top_fraction = 0.10);

/// Mean over positions of true-token log-probability minus the mean entropy
/// of the k most similar positions in logit space.
double signal_neighbor_entropy_contrast(const LogitSample& s, std::size_t embed_dims = 128,
                                        std::size_t k = 5);

}  // namespace miasig::logit
