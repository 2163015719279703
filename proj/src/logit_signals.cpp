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

#include "miasig/logit_signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "miasig/errors.hpp"
#include "miasig/rng.hpp"

namespace miasig::logit {

namespace {

std::vector<double> to_double(std::span<const float> z) { return {z.begin(), z.end()}; }

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double x : z) sum += std::exp(x - m);
  return m + std::log(sum);
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0) throw InvalidArgument("renyi alpha must be > 0 and != 1");
}

void check_fraction(double f, const char* what) {
  if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in (0, 1]");
}

}  // namespace

std::vector<double> log_softmax_row(std::span<const double> z) {
  if (z.empty()) throw InvalidArgument("log_softmax_row of an empty row");
  const double lse = log_sum_exp(z);
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
  return out;
}

std::vector<double> log_softmax_row(std::span<const float> z) {
  const auto d = to_double(z);
  return log_softmax_row(std::span<const double>(d));
}

double renyi_entropy(std::span<const double> p, double alpha) {
  check_alpha(alpha);
  double sum = 0.0;
  for (double x : p) {
    if (x > 0.0) sum += std::pow(x, alpha);
  }
  return std::log(sum) / (1.0 - alpha);
}

double renyi_entropy_from_log_probs(std::span<const double> log_p, double alpha) {
  check_alpha(alpha);
  std::vector<double> scaled(log_p.size());
  for (std::size_t i = 0; i < log_p.size(); ++i) scaled[i] = alpha * log_p[i];
  return log_sum_exp(scaled) / (1.0 - alpha);
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double shannon_entropy_from_log_probs(std::span<const double> log_p) {
  double h = 0.0;
  for (double lp : log_p) {
    const double p = std::exp(lp);
    if (p > 0.0) h -= p * lp;
  }
  return h;
}

std::vector<std::uint32_t> top_k_indices(std::span<const double> values, std::size_t k) {
  if (k > values.size()) throw InvalidArgument("top-k larger than the vocabulary");
  std::vector<std::uint32_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return values[a] != values[b] ? values[a] > values[b] : a < b;
                    });
  idx.resize(k);
  return idx;
}

std::size_t upper_tail_rank(double q, std::size_t n) {
  if (n == 0) throw InvalidArgument("quantile of an empty set");
  const double below = std::floor(q * static_cast<double>(n) + 1e-9);
  const auto rank = static_cast<std::size_t>(std::max(below, 0.0)) + 1;
  return std::clamp<std::size_t>(rank, 1, n);
}

double mean_above_quantile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double threshold = sorted[upper_tail_rank(q, sorted.size()) - 1];
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (v >= threshold) {
      sum += v;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

std::uint64_t noise_stream_seed(std::uint64_t seed, std::string_view sample_id, std::size_t pass) {
  return mix64(mix64(mix64(seed) ^ fnv1a64(sample_id)) + static_cast<std::uint64_t>(pass));
}

double pairwise_rank_inversion(std::span<const std::uint32_t> r1, std::span<const std::uint32_t> r2,
                               std::size_t k) {
  if (r1.size() != r2.size()) {
    throw InvalidArgument("rank vectors differ in length: " + std::to_string(r1.size()) + " vs " +
                          std::to_string(r2.size()));
  }
  if (k < 2) throw InvalidArgument("rank window k must be >= 2");
  if (r1.empty()) return 0.0;
  const double pairs = static_cast<double>(k * (k - 1) / 2);

  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t start = 0; start < r1.size(); start += k) {
    const std::size_t len = std::min(k, r1.size() - start);
    auto w1 = r1.subspan(start, len);
    auto w2 = r2.subspan(start, len);
    // Positions of values present in both windows, first occurrence wins.
    std::vector<std::pair<std::size_t, std::size_t>> common;
    for (std::size_t i = 0; i < len; ++i) {
      if (std::find(w1.begin(), w1.begin() + static_cast<std::ptrdiff_t>(i), w1[i]) !=
          w1.begin() + static_cast<std::ptrdiff_t>(i)) {
        continue;
      }
      auto it = std::find(w2.begin(), w2.end(), w1[i]);
      if (it != w2.end()) common.emplace_back(i, static_cast<std::size_t>(it - w2.begin()));
    }
    std::size_t inversions = 0;
    for (std::size_t a = 0; a < common.size(); ++a) {
      for (std::size_t b = a + 1; b < common.size(); ++b) {
        if (common[b].second < common[a].second) ++inversions;
      }
    }
    total += static_cast<double>(inversions) / pairs;
    ++windows;
  }
  return total / static_cast<double>(windows);
}

// --- Signals -------------------------------------------------------------------

double signal_max_renyi(const LogitSample& s, double alpha, double top_fraction) {
  check_alpha(alpha);
  check_fraction(top_fraction, "top_fraction");
  const std::size_t L = s.logits.rows();
  std::vector<double> entropies(L);
  for (std::size_t i = 0; i < L; ++i) {
    entropies[i] = renyi_entropy_from_log_probs(log_softmax_row(s.logits.row(i)), alpha);
  }
  std::sort(entropies.begin(), entropies.end());
  const double want = std::ceil(top_fraction * static_cast<double>(L) - 1e-9);
  const std::size_t count = std::clamp<std::size_t>(static_cast<std::size_t>(want), 1, L);
  return -mean(std::span<const double>(entropies.data(), count));
}

double signal_rank_stability(const LogitSample& s, const NoiseSpec& noise, std::size_t k) {
  const std::size_t L = s.logits.rows();
  const std::size_t V = s.logits.cols();
  if (V < k) throw InvalidArgument("rank_stability needs V >= k");
  if (noise.passes < 2) throw InvalidArgument("rank_stability needs at least 2 passes");
  if (!(noise.sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");

  std::vector<std::vector<std::uint32_t>> ranks(noise.passes);
  std::vector<double> row(V);
  for (std::size_t p = 0; p < noise.passes; ++p) {
    Rng rng(noise_stream_seed(noise.seed, s.id, p));
    auto& r = ranks[p];
    r.reserve(L * k);
    for (std::size_t i = 0; i < L; ++i) {
      const auto z = s.logits.row(i);
      for (std::size_t v = 0; v < V; ++v) row[v] = static_cast<double>(z[v]) + noise.sigma * rng.normal();
      const auto top = top_k_indices(row, k);
      r.insert(r.end(), top.begin(), top.end());
    }
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t p = 0; p < noise.passes; ++p) {
    for (std::size_t q = p + 1; q < noise.passes; ++q) {
      sum += pairwise_rank_inversion(ranks[p], ranks[q], k);
      ++pairs;
    }
  }
  return -(sum / static_cast<double>(pairs));
}

double signal_log_ratio_variance(const LogitSample& s, double decay_scale, double top_fraction) {
  constexpr std::size_t kAlternatives = 5;
  const std::size_t L = s.logits.rows();
  const std::size_t V = s.logits.cols();
  if (V < kAlternatives + 1) throw InvalidArgument("log_ratio_variance needs V >= 6");
  if (!(decay_scale > 0.0)) throw InvalidArgument("decay_scale must be positive");
  check_fraction(top_fraction, "top_fraction");

  std::vector<double> weighted(L);
  for (std::size_t i = 0; i < L; ++i) {
    auto z = to_double(s.logits.row(i));
    const auto lsm = log_softmax_row(std::span<const double>(z));
    const std::uint32_t truth = s.true_tokens[i];
    const double true_lp = lsm[truth];

    // Strongest five alternatives: rank with the true token pushed to the bottom.
    auto masked = z;
    masked[truth] = -std::numeric_limits<double>::infinity();
    const auto alts = top_k_indices(masked, kAlternatives);
    std::vector<double> alt_logits;
    for (auto a : alts) alt_logits.push_back(z[a]);
    const double lse = log_sum_exp(alt_logits);

    double gaps[kAlternatives];
    double gap_mean = 0.0;
    for (std::size_t a = 0; a < kAlternatives; ++a) {
      gaps[a] = true_lp - (alt_logits[a] - lse);
      gap_mean += gaps[a];
    }
    gap_mean /= kAlternatives;
    double var = 0.0;
    for (double g : gaps) var += (g - gap_mean) * (g - gap_mean);
    var /= kAlternatives;
    weighted[i] = var * std::exp(-static_cast<double>(i) / decay_scale);
  }
  return mean_above_quantile(weighted, 1.0 - top_fraction);
}

double signal_topk_confidence(const LogitSample& s, std::size_t k, double top_fraction) {
  const std::size_t L = s.logits.rows();
  if (k == 0 || s.logits.cols() < k) throw InvalidArgument("topk_confidence needs 1 <= k <= V");
  check_fraction(top_fraction, "top_fraction");
  std::vector<double> confidence(L);
  for (std::size_t i = 0; i < L; ++i) {
    const auto lsm = log_softmax_row(s.logits.row(i));
    double sum = 0.0;
    for (auto t : top_k_indices(lsm, k)) sum += lsm[t];
    confidence[i] = sum / static_cast<double>(k);
  }
  return mean_above_quantile(confidence, 1.0 - top_fraction);
}

double signal_neighbor_entropy_contrast(const LogitSample& s, std::size_t embed_dims, std::size_t k) {
  const std::size_t L = s.logits.rows();
  const std::size_t V = s.logits.cols();
  if (k == 0 || L < k + 1) throw InvalidArgument("neighbor_entropy_contrast needs L >= k + 1");
  if (embed_dims == 0) throw InvalidArgument("embed_dims must be positive");
  const std::size_t dims = std::min(embed_dims, V);

  std::vector<double> embed(L * dims);
  std::vector<double> true_lp(L), entropy(L);
  for (std::size_t i = 0; i < L; ++i) {
    const auto z = s.logits.row(i);
    double norm = 0.0;
    for (std::size_t d = 0; d < dims; ++d) norm += static_cast<double>(z[d]) * z[d];
    norm = std::sqrt(norm);
    for (std::size_t d = 0; d < dims; ++d) embed[i * dims + d] = norm > 0.0 ? z[d] / norm : 0.0;
    const auto lsm = log_softmax_row(z);
    true_lp[i] = lsm[s.true_tokens[i]];
    entropy[i] = shannon_entropy_from_log_probs(lsm);
  }

  double total = 0.0;
  std::vector<double> sim(L);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < dims; ++d) dot += embed[i * dims + d] * embed[j * dims + d];
      sim[j] = dot;
    }
    sim[i] = -std::numeric_limits<double>::infinity();
    double h = 0.0;
    for (auto j : top_k_indices(sim, k)) h += entropy[j];
    total += true_lp[i] - h / static_cast<double>(k);
  }
  return total / static_cast<double>(L);
}

}  // namespace miasig::logit
