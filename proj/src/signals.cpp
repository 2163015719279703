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

#include "miasig/signals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <thread>

#include "miasig/errors.hpp"
#include "miasig/logit_signals.hpp"
#include "miasig/text_signals.hpp"

namespace miasig {

namespace {

constexpr std::array kSignals = {
    SignalInfo{"max_coverage", SignalFamily::Text, "max n-gram coverage of the suffix by any generation"},
    SignalInfo{"geo_edit_distance", SignalFamily::Text,
               "geometric mean of suffix proximity and generation consistency"},
    SignalInfo{"rare_trigram_agg", SignalFamily::Text, "log-inverse frequency x recurrence of generation trigrams"},
    SignalInfo{"rarity_longest_match", SignalFamily::Text,
               "edit distance discounted by rarity of the longest suffix match"},
    SignalInfo{"inv_freq_mismatch", SignalFamily::Text,
               "inverse-frequency positional mismatch of the closest generations"},
    SignalInfo{"recurrent_rare_trigram", SignalFamily::Text, "rare suffix trigrams recurring in >= 2 generations"},
    SignalInfo{"internal_repetition", SignalFamily::Text, "excess repeated 3/4/5-grams within generations"},
    SignalInfo{"max_renyi", SignalFamily::Logit, "negated mean Renyi entropy of the most confident positions"},
    SignalInfo{"rank_stability", SignalFamily::Logit, "top-k rank agreement under Gaussian logit noise"},
    SignalInfo{"log_ratio_variance", SignalFamily::Logit, "position-decayed variance of true-vs-alternative log ratios"},
    SignalInfo{"topk_confidence", SignalFamily::Logit, "upper tail of mean top-k log-probabilities"},
    SignalInfo{"neighbor_entropy_contrast", SignalFamily::Logit,
               "true-token log-prob minus entropy of similar positions"},
};

double default_top_fraction(std::string_view name) {
  return name == "log_ratio_variance" ? 0.05 : 0.10;
}

std::size_t default_top_k(std::string_view name) {
  if (name == "rank_stability") return 10;
  return 5;
}

using TextFn = std::function<double(const TextSample&)>;
using LogitFn = std::function<double(const LogitSample&)>;

TextFn bind_text(std::string_view name, const SignalParams& p, const Dataset& data) {
  if (name == "max_coverage") return [L = p.ngram](const TextSample& s) { return text::signal_max_coverage(s, L); };
  if (name == "geo_edit_distance") {
    return [d = p.d_max](const TextSample& s) { return text::signal_geometric_edit_distance(s, d); };
  }
  if (name == "rare_trigram_agg") {
    auto table = std::make_shared<text::TrigramFreqTable>(text::build_trigram_freq_table(data));
    return [table](const TextSample& s) { return text::signal_rare_trigram_aggregation(s, *table); };
  }
  if (name == "rarity_longest_match") {
    return [d = p.d_max](const TextSample& s) { return text::signal_rarity_weighted_longest_match(s, d); };
  }
  if (name == "inv_freq_mismatch") {
    return [d = p.d_max, kf = p.keep_fraction](const TextSample& s) {
      return text::signal_inverse_frequency_mismatch(s, d, kf);
    };
  }
  if (name == "recurrent_rare_trigram") return [](const TextSample& s) { return text::signal_recurrent_rare_trigram(s); };
  if (name == "internal_repetition") return [](const TextSample& s) { return text::signal_internal_repetition(s); };
  throw InvalidArgument("unknown text signal '" + std::string(name) + "'");
}

LogitFn bind_logit(std::string_view name, const SignalParams& p) {
  const double frac = p.top_fraction.value_or(default_top_fraction(name));
  const std::size_t k = p.top_k.value_or(default_top_k(name));
  if (name == "max_renyi") {
    return [a = p.alpha, frac](const LogitSample& s) { return logit::signal_max_renyi(s, a, frac); };
  }
  if (name == "rank_stability") {
    logit::NoiseSpec noise{p.passes, p.sigma, p.noise_seed};
    return [noise, k](const LogitSample& s) { return logit::signal_rank_stability(s, noise, k); };
  }
  if (name == "log_ratio_variance") {
    return [scale = p.decay_scale, frac](const LogitSample& s) {
      return logit::signal_log_ratio_variance(s, scale, frac);
    };
  }
  if (name == "topk_confidence") {
    return [k, frac](const LogitSample& s) { return logit::signal_topk_confidence(s, k, frac); };
  }
  if (name == "neighbor_entropy_contrast") {
    return [dims = p.embed_dims, k](const LogitSample& s) {
      return logit::signal_neighbor_entropy_contrast(s, dims, k);
    };
  }
  throw InvalidArgument("unknown logit signal '" + std::string(name) + "'");
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads, rethrowing the first
/// failure by sample index.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += jobs) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::span<const SignalInfo> registered_signals() { return kSignals; }

const SignalInfo* find_signal(std::string_view name) {
  auto it = std::find_if(kSignals.begin(), kSignals.end(), [&](const SignalInfo& s) { return s.name == name; });
  return it == kSignals.end() ? nullptr : &*it;
}

const SignalInfo& require_signal(std::string_view name) {
  if (const auto* info = find_signal(name)) return *info;
  throw InvalidArgument("unknown signal '" + std::string(name) + "'");
}

nlohmann::json effective_params(std::string_view name, const SignalParams& p) {
  nlohmann::json j = nlohmann::json::object();
  if (name == "max_coverage") j["ngram"] = p.ngram;
  if (name == "geo_edit_distance" || name == "rarity_longest_match") j["d_max"] = p.d_max;
  if (name == "inv_freq_mismatch") {
    j["d_max"] = p.d_max;
    j["keep_fraction"] = p.keep_fraction;
  }
  if (name == "max_renyi") j["alpha"] = p.alpha;
  if (name == "rank_stability") {
    j["passes"] = p.passes;
    j["sigma"] = p.sigma;
    j["noise_seed"] = p.noise_seed;
  }
  if (name == "log_ratio_variance") j["decay_scale"] = p.decay_scale;
  if (name == "neighbor_entropy_contrast") j["embed_dims"] = p.embed_dims;
  if (name == "max_renyi" || name == "log_ratio_variance" || name == "topk_confidence") {
    j["top_fraction"] = p.top_fraction.value_or(default_top_fraction(name));
  }
  if (name == "rank_stability" || name == "topk_confidence" || name == "neighbor_entropy_contrast") {
    j["top_k"] = p.top_k.value_or(default_top_k(name));
  }
  return j;
}

std::vector<ScoredSample> score_dataset(const Dataset& data, std::string_view name,
                                        const SignalParams& params, unsigned jobs) {
  const auto& info = require_signal(name);
  const bool text_data = data.kind() == DatasetKind::Text;
  if ((info.family == SignalFamily::Text) != text_data) {
    throw InvalidArgument("signal '" + std::string(name) + "' expects a " +
                          (info.family == SignalFamily::Text ? "text" : "logit") + " dataset");
  }

  std::vector<ScoredSample> out(data.size());
  auto finish = [&](std::size_t i, const std::string& id, Membership label, double score) {
    if (!std::isfinite(score)) {
      throw Error("signal '" + std::string(name) + "' produced a non-finite score for sample '" + id + "'");
    }
    out[i] = ScoredSample{id, score, label};
  };

  if (text_data) {
    const auto& samples = data.text_samples();
    for (const auto& s : samples) validate(s);
    const auto fn = bind_text(name, params, data);
    parallel_for(samples.size(), jobs, [&](std::size_t i) { finish(i, samples[i].id, samples[i].label, fn(samples[i])); });
  } else {
    const auto& samples = data.logit_samples();
    for (const auto& s : samples) validate(s);
    const auto fn = bind_logit(name, params);
    parallel_for(samples.size(), jobs, [&](std::size_t i) { finish(i, samples[i].id, samples[i].label, fn(samples[i])); });
  }
  return out;
}

}  // namespace miasig
