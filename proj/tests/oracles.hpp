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

// Reference implementations used to cross-check the library. They favour
// obviousness over speed and share no code with src/.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "miasig/datamodel.hpp"
#include "miasig/logit_signals.hpp"
#include "miasig/rng.hpp"

namespace oracle {

using Seq = std::vector<std::string>;

inline Seq split(const std::string& text) {
  Seq out;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// --- edit distance / matching ------------------------------------------------------

inline std::size_t wagner_fischer(const Seq& a, const Seq& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

inline double norm_ed(const Seq& a, const Seq& b, std::size_t d_max) {
  if (a.empty() && b.empty()) return 0.0;
  const double capped = static_cast<double>(std::min(wagner_fischer(a, b), d_max + 1));
  return std::min(1.0, capped / static_cast<double>(std::max(a.size(), b.size())));
}

inline std::size_t lcsubstring_length(const Seq& g, const Seq& r) {
  std::vector<std::vector<std::size_t>> d(g.size() + 1, std::vector<std::size_t>(r.size() + 1, 0));
  std::size_t best = 0;
  for (std::size_t i = 1; i <= g.size(); ++i) {
    for (std::size_t j = 1; j <= r.size(); ++j) {
      if (g[i - 1] == r[j - 1]) {
        d[i][j] = d[i - 1][j - 1] + 1;
        best = std::max(best, d[i][j]);
      }
    }
  }
  return best;
}

inline bool contains_span(const Seq& hay, const Seq& needle) {
  if (needle.empty() || needle.size() > hay.size()) return needle.empty();
  for (std::size_t s = 0; s + needle.size() <= hay.size(); ++s) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<long>(s))) return true;
  }
  return false;
}

inline std::size_t count_span(const Seq& hay, const Seq& needle) {
  std::size_t c = 0;
  for (std::size_t s = 0; s + needle.size() <= hay.size(); ++s) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<long>(s))) ++c;
  }
  return c;
}

// Longest span (>= 2 tokens) of r that also occurs in g; earliest start in r
// wins ties. Brute force over every span of r.
inline Seq longest_match(const Seq& g, const Seq& r) {
  Seq best;
  for (std::size_t len = r.size(); len >= 2; --len) {
    for (std::size_t s = 0; s + len <= r.size(); ++s) {
      Seq span(r.begin() + static_cast<long>(s), r.begin() + static_cast<long>(s + len));
      if (contains_span(g, span)) return span;
    }
  }
  return best;
}

inline std::vector<Seq> ngrams(const Seq& s, std::size_t n) {
  std::vector<Seq> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) out.emplace_back(s.begin() + static_cast<long>(i), s.begin() + static_cast<long>(i + n));
  return out;
}

inline std::map<Seq, std::size_t> naive_ngram_counts(const std::vector<Seq>& corpus, std::size_t n) {
  std::map<Seq, std::size_t> counts;
  for (const auto& s : corpus) {
    for (auto& g : ngrams(s, n)) ++counts[g];
  }
  return counts;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline std::vector<Seq> generations(const miasig::TextSample& s) {
  std::vector<Seq> out;
  for (const auto& g : s.suffix_generations) out.push_back(split(g));
  return out;
}

// --- text signals, straight from the formulas ----------------------------------------

inline double coverage(const Seq& x1, const Seq& x2, std::size_t L) {
  if (x2.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t p = 1; p <= x2.size(); ++p) {
    if (p < L) continue;
    Seq gram(x2.begin() + static_cast<long>(p - L), x2.begin() + static_cast<long>(p));
    if (contains_span(x1, gram)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x2.size());
}

inline double max_coverage(const miasig::TextSample& s, std::size_t L) {
  const auto r = split(s.ground_truth_suffix);
  double best = 0.0;
  for (const auto& g : generations(s)) best = std::max(best, coverage(g, r, L));
  return best;
}

inline double geo_edit_distance(const miasig::TextSample& s, std::size_t d_max) {
  const auto r = split(s.ground_truth_suffix);
  const auto gens = generations(s);
  std::vector<double> to_suffix, among;
  for (const auto& g : gens) to_suffix.push_back(norm_ed(g, r, d_max));
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (std::size_t j = i + 1; j < gens.size(); ++j) among.push_back(norm_ed(gens[i], gens[j], d_max));
  }
  const double s1 = 1.0 - median(to_suffix);
  const double s2 = among.empty() ? 1.0 : 1.0 - median(among);
  return std::clamp(std::sqrt(std::max(0.0, s1 * s2)), 0.0, 1.0);
}

inline double rare_trigram_agg(const miasig::TextSample& s, const std::map<Seq, std::size_t>& freq) {
  std::map<Seq, std::size_t> recurrence;
  for (const auto& g : generations(s)) {
    std::set<Seq> seen;
    for (auto& t : ngrams(g, 3)) seen.insert(t);
    for (const auto& t : seen) ++recurrence[t];
  }
  double total = 0.0;
  for (const auto& [t, r] : recurrence) {
    auto it = freq.find(t);
    const double f = it == freq.end() ? 1.0 : static_cast<double>(it->second);
    total += std::log(1.0 / (f * static_cast<double>(r)));
  }
  return total;
}

inline double rarity_longest_match(const miasig::TextSample& s, std::size_t d_max) {
  const auto r = split(s.ground_truth_suffix);
  double N = 0.0;
  for (std::size_t n = 1; n <= 3; ++n) N += static_cast<double>(r.size() >= n ? r.size() - n + 1 : 0);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& g : generations(s)) {
    const double dhat = norm_ed(g, r, d_max);
    const auto l = longest_match(g, r);
    const double w = l.size() >= 2 ? N / static_cast<double>(count_span(r, l)) : N / static_cast<double>(r.size());
    best = std::max(best, 1.0 - dhat * (1.0 - std::min(w / (N + 1.0), 1.0)));
  }
  return best;
}

inline double inv_freq_mismatch(const miasig::TextSample& s, std::size_t d_max, double keep_fraction) {
  const auto r = split(s.ground_truth_suffix);
  const double L = static_cast<double>(r.size());
  auto w = [&](const std::string& t) {
    const double p = static_cast<double>(std::count(r.begin(), r.end(), t)) / L;
    return 1.0 / p;
  };
  auto gens = generations(s);
  std::vector<std::pair<double, Seq>> ranked;
  for (auto& g : gens) ranked.emplace_back(static_cast<double>(std::min(wagner_fischer(g, r), d_max + 1)) / L, g);
  std::sort(ranked.begin(), ranked.end());
  std::size_t keep = 1;
  while (static_cast<double>(keep) < keep_fraction * static_cast<double>(gens.size()) - 1e-9) ++keep;
  keep = std::min(keep, gens.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < keep; ++k) {
    const auto& g = ranked[k].second;
    double m = 0.0;
    for (std::size_t i = 1; i <= r.size(); ++i) {
      if (i > g.size() || g[i - 1] != r[i - 1]) m += w(r[i - 1]);
    }
    best = std::max(best, m);
  }
  return best;
}

inline double recurrent_rare_trigram(const miasig::TextSample& s) {
  const auto r = split(s.ground_truth_suffix);
  const auto c = naive_ngram_counts({r}, 3);
  const auto gens = generations(s);
  double total = 0.0;
  for (const auto& [t, count] : c) {
    std::size_t a = 0;
    for (const auto& g : gens) a += contains_span(g, t) ? 1 : 0;
    if (a >= 2) total += 1.0 / (1.0 + static_cast<double>(count));
  }
  return total;
}

inline double internal_repetition(const miasig::TextSample& s) {
  const auto gens = generations(s);
  double sum = 0.0;
  for (const auto& g : gens) {
    if (g.empty()) continue;
    double R = 0.0;
    for (std::size_t n = 3; n <= 5; ++n) {
      for (const auto& [_, c] : naive_ngram_counts({g}, n)) {
        if (c >= 2) R += static_cast<double>(c - 1);
      }
    }
    sum += R / static_cast<double>(g.size());
  }
  return sum / static_cast<double>(gens.size());
}

// --- metrics ----------------------------------------------------------------------------

inline double pair_auc(const std::vector<miasig::ScoredSample>& s) {
  double wins = 0.0, pairs = 0.0;
  for (const auto& m : s) {
    if (m.label != miasig::Membership::Member) continue;
    for (const auto& n : s) {
      if (n.label != miasig::Membership::NonMember) continue;
      pairs += 1.0;
      if (m.score > n.score) wins += 1.0;
      else if (m.score == n.score) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline double sweep_tpr(const std::vector<miasig::ScoredSample>& s, double target) {
  std::vector<double> thresholds = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& x : s) thresholds.push_back(x.score);
  double P = 0, N = 0;
  for (const auto& x : s) (x.label == miasig::Membership::Member ? P : N) += 1;
  double best = 0.0;
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (const auto& x : s) {
      if (x.score > t) (x.label == miasig::Membership::Member ? tp : fp) += 1;
    }
    if (fp / N <= target) best = std::max(best, tp / P);
  }
  return best;
}

// --- logit formulas in extended precision --------------------------------------------------

using LD = long double;

inline std::vector<LD> log_softmax(const std::vector<LD>& z) {
  LD m = *std::max_element(z.begin(), z.end());
  LD s = 0;
  for (LD v : z) s += std::exp(v - m);
  std::vector<LD> out;
  for (LD v : z) out.push_back(v - m - std::log(s));
  return out;
}

inline std::vector<LD> row(const miasig::LogitSample& s, std::size_t i) {
  std::vector<LD> out;
  for (float v : s.logits.row(i)) out.push_back(static_cast<LD>(v));
  return out;
}

inline LD renyi(const std::vector<LD>& logp, LD alpha) {
  LD s = 0;
  for (LD lp : logp) s += std::exp(alpha * lp);
  return std::log(s) / (1 - alpha);
}

inline LD shannon(const std::vector<LD>& logp) {
  LD h = 0;
  for (LD lp : logp) h -= std::exp(lp) * lp;
  return h;
}

inline std::vector<std::size_t> order_desc(const std::vector<LD>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return idx;
}

// Nearest-rank upper tail: the threshold is the value at 0-based ascending
// position floor(q * n); average everything at or above it.
inline LD upper_tail_mean(std::vector<LD> v, double q) {
  std::vector<LD> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::size_t pos = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size()) + 1e-9));
  pos = std::min(pos, v.size() - 1);
  const LD cut = sorted[pos];
  LD sum = 0;
  std::size_t n = 0;
  for (LD x : v) {
    if (x >= cut) {
      sum += x;
      ++n;
    }
  }
  return sum / static_cast<LD>(n);
}

inline double max_renyi(const miasig::LogitSample& s, double alpha, double frac) {
  std::vector<LD> h;
  for (std::size_t i = 0; i < s.logits.rows(); ++i) h.push_back(renyi(log_softmax(row(s, i)), alpha));
  std::sort(h.begin(), h.end());
  std::size_t k = 1;
  while (static_cast<double>(k) < frac * static_cast<double>(h.size()) - 1e-9) ++k;
  LD sum = 0;
  for (std::size_t i = 0; i < k; ++i) sum += h[i];
  return static_cast<double>(-sum / static_cast<LD>(k));
}

inline double topk_confidence(const miasig::LogitSample& s, std::size_t k, double frac) {
  std::vector<LD> conf;
  for (std::size_t i = 0; i < s.logits.rows(); ++i) {
    auto lp = log_softmax(row(s, i));
    std::sort(lp.begin(), lp.end(), std::greater<>());
    LD sum = 0;
    for (std::size_t j = 0; j < k; ++j) sum += lp[j];
    conf.push_back(sum / static_cast<LD>(k));
  }
  return static_cast<double>(upper_tail_mean(conf, 1.0 - frac));
}

inline double log_ratio_variance(const miasig::LogitSample& s, double decay, double frac) {
  std::vector<LD> v;
  for (std::size_t i = 0; i < s.logits.rows(); ++i) {
    const auto z = row(s, i);
    const std::size_t t = s.true_tokens[i];
    const LD lt = log_softmax(z)[t];
    std::vector<std::size_t> alts;
    for (std::size_t j : order_desc(z)) {
      if (j != t && alts.size() < 5) alts.push_back(j);
    }
    std::vector<LD> az;
    for (auto j : alts) az.push_back(z[j]);
    const auto alp = log_softmax(az);
    LD mean = 0;
    std::vector<LD> g;
    for (LD a : alp) {
      g.push_back(lt - a);
      mean += lt - a;
    }
    mean /= 5;
    LD var = 0;
    for (LD x : g) var += (x - mean) * (x - mean);
    var /= 5;
    v.push_back(var * std::exp(-static_cast<LD>(i) / static_cast<LD>(decay)));
  }
  return static_cast<double>(upper_tail_mean(v, 1.0 - frac));
}

inline double neighbor_entropy_contrast(const miasig::LogitSample& s, std::size_t dims, std::size_t k) {
  const std::size_t L = s.logits.rows();
  const std::size_t D = std::min(dims, s.logits.cols());
  std::vector<std::vector<LD>> e(L);
  std::vector<LD> lt(L), H(L);
  for (std::size_t i = 0; i < L; ++i) {
    auto z = row(s, i);
    LD n = 0;
    for (std::size_t d = 0; d < D; ++d) n += z[d] * z[d];
    n = std::sqrt(n);
    for (std::size_t d = 0; d < D; ++d) e[i].push_back(n > 0 ? z[d] / n : 0);
    auto lp = log_softmax(z);
    lt[i] = lp[s.true_tokens[i]];
    H[i] = shannon(lp);
  }
  LD total = 0;
  for (std::size_t i = 0; i < L; ++i) {
    std::vector<LD> sim(L);
    for (std::size_t j = 0; j < L; ++j) {
      LD dot = 0;
      for (std::size_t d = 0; d < D; ++d) dot += e[i][d] * e[j][d];
      sim[j] = j == i ? -std::numeric_limits<LD>::infinity() : dot;
    }
    const auto idx = order_desc(sim);
    LD h = 0;
    for (std::size_t j = 0; j < k; ++j) h += H[idx[j]];
    total += lt[i] - h / static_cast<LD>(k);
  }
  return static_cast<double>(total / static_cast<LD>(L));
}

// Windowed Kendall disagreement counted pair by pair over shared values.
inline double rank_inversion(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b, std::size_t k) {
  double total = 0;
  std::size_t windows = 0;
  for (std::size_t st = 0; st < a.size(); st += k) {
    const std::size_t len = std::min(k, a.size() - st);
    std::vector<std::uint32_t> wa(a.begin() + static_cast<long>(st), a.begin() + static_cast<long>(st + len));
    std::vector<std::uint32_t> wb(b.begin() + static_cast<long>(st), b.begin() + static_cast<long>(st + len));
    auto pos = [](const std::vector<std::uint32_t>& w, std::uint32_t v) {
      return static_cast<std::size_t>(std::find(w.begin(), w.end(), v) - w.begin());
    };
    std::set<std::uint32_t> common;
    for (auto v : wa) {
      if (std::find(wb.begin(), wb.end(), v) != wb.end()) common.insert(v);
    }
    std::vector<std::uint32_t> cv(common.begin(), common.end());
    std::size_t bad = 0;
    for (std::size_t x = 0; x < cv.size(); ++x) {
      for (std::size_t y = x + 1; y < cv.size(); ++y) {
        const bool oa = pos(wa, cv[x]) < pos(wa, cv[y]);
        const bool ob = pos(wb, cv[x]) < pos(wb, cv[y]);
        if (oa != ob) ++bad;
      }
    }
    total += static_cast<double>(bad) / static_cast<double>(k * (k - 1) / 2);
    ++windows;
  }
  return windows ? total / static_cast<double>(windows) : 0.0;
}

// Perturbation follows the documented per-(seed, id, pass) stream: one
// standard normal per logit in row-major order.
inline double rank_stability(const miasig::LogitSample& s, std::size_t passes, double sigma, std::uint64_t seed,
                             std::size_t k) {
  std::vector<std::vector<std::uint32_t>> r(passes);
  for (std::size_t p = 0; p < passes; ++p) {
    miasig::Rng rng(miasig::logit::noise_stream_seed(seed, s.id, p));
    for (std::size_t i = 0; i < s.logits.rows(); ++i) {
      std::vector<LD> z;
      for (float v : s.logits.row(i)) z.push_back(static_cast<LD>(static_cast<double>(v) + sigma * rng.normal()));
      const auto idx = order_desc(z);
      for (std::size_t j = 0; j < k; ++j) r[p].push_back(static_cast<std::uint32_t>(idx[j]));
    }
  }
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < passes; ++p) {
    for (std::size_t q = p + 1; q < passes; ++q) {
      sum += rank_inversion(r[p], r[q], k);
      ++n;
    }
  }
  return -sum / static_cast<double>(n);
}

}  // namespace oracle
