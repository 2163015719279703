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

#include <vector>

#include "miasig/rng.hpp"
#include "miasig/search/database.hpp"
#include "miasig/search/plugins.hpp"
#include "miasig/search/types.hpp"

namespace miasig::search {

/// Up to k distinct records drawn uniformly without replacement, in draw
/// order.
std::vector<ExperimentRecord> sample_records(const ExperimentDb& db, std::size_t k, Rng& rng);

/// Novelty-check neighbourhood of a design: two nearest ideas, two nearest
/// justifications, two nearest analyses (queried with the justification
/// text) and the BM25 top retrieval_k over idea + justification, deduplicated
/// by id in that order.
std::vector<ExperimentRecord> explorer_neighbors(const ExperimentDb& db, const Design& design,
                                                 const SearchConfig& config);

/// Novelty-guided design loop. Draws seed records, asks for an initial
/// design, then for up to explorer_refine_budget rounds consults the judge:
/// accept returns, revise refines with the suggestions, redesign restarts
/// from fresh seeds. Returns the latest candidate when the budget runs out.
/// The result never has a parent.
Design explorer_step(const ExperimentDb& db, const SearchConfig& config, DesignGenerator& generator,
                     NoveltyJudge& judge, Rng& rng);

/// Selection weights over the top-K scored records, best AUC first.
struct ParentCandidates {
  std::vector<ExperimentRecord> top;          // top-K by AUC, ties by lower id
  std::vector<ExperimentId> cluster_of;       // root ancestor of each entry of `top`
};

ParentCandidates exploit_candidates(const ExperimentDb& db, const SearchConfig& config);

/// Picks the parent for refinement. Lineage mode samples a root-lineage
/// cluster with weight max(best AUC - 0.5, 0), then a record in it with
/// weight max(AUC - 0.5, 0). Flat mode weights each record by |AUC - 0.5|.
/// All-zero weights fall back to a uniform draw over the top-K.
ExperimentRecord exploiter_select_parent(const ExperimentDb& db, const SearchConfig& config, Rng& rng);

/// Gathers the parent's ancestor chain, siblings and related records and
/// asks the generator for a child design whose parent_id is the parent.
Design exploiter_step(const ExperimentDb& db, const SearchConfig& config, DesignGenerator& generator, Rng& rng);

}  // namespace miasig::search
