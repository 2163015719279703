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
#include <string>
#include <string_view>

#include "json.hpp"
#include "miasig/evaluation.hpp"

namespace miasig::search {

using ExperimentId = std::uint64_t;

/// A signal design in natural language. Explorer designs have no parent.
struct Design {
  std::string idea;
  std::string design_justification;
  std::string implementation_instruction;
  std::optional<ExperimentId> parent_id;

  friend bool operator==(const Design&, const Design&) = default;
};

enum class RunStatus { Ok, Fail, Timeout };
enum class SearchMode { Seed, Explore, Exploit };

std::string_view to_string(RunStatus s);
std::string_view to_string(SearchMode m);
RunStatus parse_run_status(std::string_view s);
SearchMode parse_search_mode(std::string_view s);

/// One attempt stored in the experiment database.
struct ExperimentRecord {
  ExperimentId id = 0;
  Design design;
  std::string code_ref;
  RunStatus status = RunStatus::Ok;
  std::optional<MetricsReport> metrics;  // present iff status is Ok
  std::string analysis;
  std::size_t iteration = 0;
  SearchMode mode = SearchMode::Explore;
  std::size_t fix_rounds = 0;

  double auc() const { return metrics ? metrics->auc : 0.5; }

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

enum class ExploitMode {
  Lineage,  // cluster the top-K by root ancestor, weight max(AUC - 0.5, 0)
  Flat,     // weight every top-K record by |AUC - 0.5|
};

struct SearchConfig {
  std::size_t budget = 100;
  std::size_t timeout_seconds = 300;
  std::size_t explore_period = 3;
  std::size_t top_k_exploit = 10;
  std::size_t explorer_seed_count = 3;
  std::size_t explorer_refine_budget = 3;
  std::size_t max_fix_rounds = 3;
  std::size_t retrieval_k = 5;
  std::size_t embed_dim = 256;
  std::uint64_t rng_seed = 0;
  ExploitMode exploit_mode = ExploitMode::Lineage;
  /// Cap on design attempts, inserted or not; 0 means 5 x budget.
  std::size_t max_attempts = 0;
  /// Wall-clock limit for a single generator/judge plugin call.
  std::size_t plugin_timeout_seconds = 600;

  std::size_t attempt_cap() const { return max_attempts ? max_attempts : 5 * budget; }
};

/// Throws InvalidArgument when a field is out of range.
void validate(const SearchConfig& config);

enum class JudgeAction { Accept, Revise, Redesign };

struct JudgeVerdict {
  JudgeAction action = JudgeAction::Accept;
  double novelty_score = 1.0;
  std::string suggestions;
};

nlohmann::json to_json(const Design& d);
Design design_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentRecord& r);
ExperimentRecord record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SearchConfig& c);
/// Rejects unknown keys; missing keys keep their defaults.
SearchConfig config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const JudgeVerdict& v);
JudgeVerdict verdict_from_json(const nlohmann::json& j);

}  // namespace miasig::search
