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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "miasig/datamodel.hpp"
#include "miasig/search/database.hpp"
#include "miasig/search/plugins.hpp"
#include "miasig/search/runner.hpp"
#include "miasig/search/types.hpp"

namespace miasig::search {

/// Baseline inserted before the search proper (iteration 0, mode seed).
struct SeedCandidate {
  std::string code_ref;
  std::string idea;
  std::string justification;
};

/// Executes one candidate. Defaults to run_candidate; tests swap in scripts.
using Executor = std::function<CandidateRun(const std::string& code_ref)>;

struct LoopOptions {
  std::filesystem::path workdir;
  /// Receives one JSON line per candidate execution, inserted or not.
  std::ostream* run_journal = nullptr;
  Executor executor;
};

struct LoopStats {
  std::size_t attempts = 0;     // designs produced (seed included)
  std::size_t executions = 0;   // candidate runs, fixes included
  std::size_t inserted = 0;
  std::size_t abandoned = 0;    // designs that never reached status ok
};

/// Mode the schedule assigns at a given database count.
SearchMode scheduled_mode(std::size_t count, std::size_t explore_period);

/// Runs the dual-agent loop until the database holds `budget` records or
/// the attempt cap is hit. Plugin failures propagate as PluginError; records
/// inserted so far stay in `db` (and its journal).
LoopStats main_loop(const SearchConfig& config, DesignGenerator& generator, NoveltyJudge& judge,
                    const Dataset& data, const std::optional<SeedCandidate>& seed, ExperimentDb& db,
                    const LoopOptions& options = {});

/// Cosine similarity of every unordered pair (i < j, row-major order) of
/// description embeddings. Descriptions default to the four canonical
/// REPRESENTATION / COMPARISON / AGGREGATION / SCORE lines of each record's
/// analysis, falling back to the whole analysis when those are absent.
std::vector<double> pairwise_design_similarity(const std::vector<ExperimentRecord>& records,
                                               std::size_t embed_dim = 256);
std::vector<double> pairwise_description_similarity(const std::vector<std::string>& descriptions,
                                                    std::size_t embed_dim = 256);

/// The canonical description lines of an analysis text.
std::string canonical_description(const std::string& analysis);

}  // namespace miasig::search
