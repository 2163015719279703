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

#include "miasig/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "miasig/errors.hpp"

namespace miasig {

namespace {

struct ClassCounts {
  std::size_t members = 0;
  std::size_t nonmembers = 0;
};

ClassCounts count_classes(std::span<const ScoredSample> scores) {
  ClassCounts c;
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) throw InvalidArgument("score for sample '" + s.id + "' is not finite");
    (is_member(s.label) ? c.members : c.nonmembers) += 1;
  }
  if (c.members == 0 || c.nonmembers == 0) {
    throw InvalidArgument("metrics need at least one member and one non-member");
  }
  return c;
}

}  // namespace

double auc(std::span<const ScoredSample> scores) {
  const auto counts = count_classes(scores);
  std::vector<std::pair<double, bool>> ranked;
  ranked.reserve(scores.size());
  for (const auto& s : scores) ranked.emplace_back(s.score, is_member(s.label));
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Sum of (1-based) midranks over members.
  double member_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < ranked.size()) {
    std::size_t j = i;
    while (j < ranked.size() && ranked[j].first == ranked[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (ranked[t].second) member_rank_sum += midrank;
    }
    i = j;
  }
  const double n1 = static_cast<double>(counts.members);
  const double n0 = static_cast<double>(counts.nonmembers);
  const double u = member_rank_sum - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * n0);
}

std::vector<RocPoint> roc_curve(std::span<const ScoredSample> scores) {
  const auto counts = count_classes(scores);
  std::vector<std::pair<double, bool>> ranked;
  ranked.reserve(scores.size());
  for (const auto& s : scores) ranked.emplace_back(s.score, is_member(s.label));
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double n1 = static_cast<double>(counts.members);
  const double n0 = static_cast<double>(counts.nonmembers);
  std::vector<RocPoint> roc;
  roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  // Threshold t = ranked[i].first predicts member for everything strictly
  // above it, i.e. the groups already consumed.
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < ranked.size()) {
    const double t = ranked[i].first;
    roc.push_back({t, static_cast<double>(fp) / n0, static_cast<double>(tp) / n1});
    while (i < ranked.size() && ranked[i].first == t) {
      (ranked[i].second ? tp : fp) += 1;
      ++i;
    }
  }
  roc.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
  return roc;
}

double tpr_at_fpr(std::span<const ScoredSample> scores, double fpr_target) {
  double best = 0.0;
  for (const auto& p : roc_curve(scores)) {
    if (p.fpr <= fpr_target) best = std::max(best, p.tpr);
  }
  return best;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc) {
  out << "fpr,tpr\n";
  char buf[64];
  for (const auto& p : roc) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.fpr, p.tpr);
    out << buf;
  }
}

std::string fpr_key(double fpr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", fpr);
  return buf;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["signal"] = r.signal_name;
  j["auc"] = r.auc;
  nlohmann::json tpr = nlohmann::json::object();
  for (const auto& [fpr, value] : r.tpr_at) tpr[fpr_key(fpr)] = value;
  j["tpr"] = tpr;
  j["n_members"] = r.n_members;
  j["n_nonmembers"] = r.n_nonmembers;
  if (!r.params.empty()) j["params"] = r.params;
  if (r.raw_auc) j["raw_auc"] = *r.raw_auc;
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    r.signal_name = j.at("signal").get<std::string>();
    r.auc = j.at("auc").get<double>();
    for (const auto& [key, value] : j.at("tpr").items()) r.tpr_at[std::stod(key)] = value.get<double>();
    r.n_members = j.at("n_members").get<std::size_t>();
    r.n_nonmembers = j.at("n_nonmembers").get<std::size_t>();
    if (j.contains("params")) r.params = j.at("params");
    if (j.contains("raw_auc")) r.raw_auc = j.at("raw_auc").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed metrics report: ") + e.what(), 0);
  }
  return r;
}

MetricsReport evaluate_scores(std::string signal_name, std::span<const ScoredSample> scores,
                              const std::vector<double>& fpr_targets) {
  const auto counts = count_classes(scores);
  MetricsReport r;
  r.signal_name = std::move(signal_name);
  r.auc = auc(scores);
  for (double target : fpr_targets) r.tpr_at[target] = tpr_at_fpr(scores, target);
  r.n_members = counts.members;
  r.n_nonmembers = counts.nonmembers;
  return r;
}

MetricsReport evaluate_signal(const Dataset& data, std::string_view signal_name,
                              const SignalParams& params, const EvalOptions& options) {
  auto scores = score_dataset(data, signal_name, params, options.jobs);
  std::optional<double> raw;
  if (options.flip) {
    raw = auc(scores);
    for (auto& s : scores) s.score = -s.score;
  }
  auto report = evaluate_scores(std::string(signal_name), scores, options.fpr_targets);
  report.params = effective_params(signal_name, params);
  report.raw_auc = raw;
  return report;
}

}  // namespace miasig
