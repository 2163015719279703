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
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "miasig/datamodel.hpp"
#include "miasig/signals.hpp"

namespace miasig {

/// ROC AUC with ties counted as one half (Mann-Whitney U over midranks).
/// Needs at least one member and one non-member.
double auc(std::span<const ScoredSample> scores);

/// Best TPR over thresholds t (member iff score > t, t ranging over the
/// observed scores and +/-inf) subject to FPR <= fpr_target.
double tpr_at_fpr(std::span<const ScoredSample> scores, double fpr_target);

struct RocPoint {
  double threshold;  // +inf for the empty prediction set, -inf for all
  double fpr;
  double tpr;
};

/// One point per distinct threshold, fpr non-decreasing.
std::vector<RocPoint> roc_curve(std::span<const ScoredSample> scores);

void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc);

inline const std::vector<double> kDefaultFprTargets = {0.01, 0.05};

struct MetricsReport {
  std::string signal_name;
  double auc = 0.5;
  std::map<double, double> tpr_at;
  std::size_t n_members = 0;
  std::size_t n_nonmembers = 0;
  nlohmann::json params = nlohmann::json::object();
  std::optional<double> raw_auc;  // set when scores were flipped

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);

/// Formats an FPR target the way report keys spell it ("0.01").
std::string fpr_key(double fpr);

MetricsReport evaluate_scores(std::string signal_name, std::span<const ScoredSample> scores,
                              const std::vector<double>& fpr_targets = kDefaultFprTargets);

struct EvalOptions {
  bool flip = false;
  unsigned jobs = 1;
  std::vector<double> fpr_targets = kDefaultFprTargets;
};

/// Scores every sample with the named signal and summarizes the result. With
/// flip set the reported metrics are those of the negated scores and raw_auc
/// keeps the unflipped value.
MetricsReport evaluate_signal(const Dataset& data, std::string_view signal_name,
                              const SignalParams& params, const EvalOptions& options = {});

}  // namespace miasig
